#include <gtest/gtest.h>

#include <map>
#include <random>

#include "wiretap/codec.hpp"

using namespace wiretap;

namespace {

// I(U;Y) for U=X uniform over a BEC(e) is 1-e; written out directly.
double bec_uniform_information(double e) { return 1.0 - e; }

ChannelFamily family_of(Dmc main, Dmc eve) { return ChannelFamily{{std::move(main)}, {std::move(eve)}, std::nullopt}; }

Dmc blind() { return Dmc::pure_noise(Eigen::VectorXd::Ones(1)); }

IndexSets hand_sets(std::size_t K, IndexSet V_U, IndexSet V_UY, IndexSet H_UY) {
  IndexSets s;
  s.K = K;
  s.V_U = std::move(V_U);
  IndexSet all(K);
  std::iota(all.begin(), all.end(), 0);
  s.H_U = all;
  s.V_UY = std::move(V_UY);
  s.H_UY = std::move(H_UY);
  s.V_X = all;
  s.V_XU = {};
  return s;
}

WiretapCode small_code(const IndexSets& sets, const ChannelFamily& fam, std::size_t L, std::size_t B,
                       std::optional<std::size_t> r = std::nullopt) {
  DeriveOptions opt;
  opt.L = L;
  opt.B = B;
  opt.r_override = r;
  auto cfg = derive_params(sets, PolarParams::make(sets.K, 0.25), SourceSpec::uniform_identity(), fam, opt);
  return make_wiretap_code(cfg, fam, {});
}

KeyMaterial random_key(std::size_t n, RandomSource& rng) { return {rng.uniform_bits(n), "test"}; }

}  // namespace

TEST(RateFormula, Examples) {
  auto src = SourceSpec::uniform_identity();
  auto t1 = rate_terms(src, family_of(Dmc::noiseless(), blind()));
  EXPECT_NEAR(theoretical_rate(t1, 0.0), 1.0, 1e-12);
  for (double a : {0.0, 0.25, 0.5}) EXPECT_NEAR(theoretical_rate(t1, a), 1.0 - a, 1e-12);
  auto t2 = rate_terms(src, family_of(Dmc::bec(0.1), Dmc::bec(0.4)));
  EXPECT_NEAR(theoretical_rate(t2, 0.0), bec_uniform_information(0.1) - bec_uniform_information(0.4), 1e-12);
  EXPECT_NEAR(theoretical_rate(t2, 0.0), 0.3, 1e-12);
}

TEST(DeriveParams, ClampAndLengths) {
  auto fam = family_of(Dmc::noiseless(), blind());
  auto sets = construct_index_sets(SourceSpec::uniform_identity(), fam.mains[0], PolarParams::make(8, 0.25), {});
  DeriveOptions opt;
  opt.L = 2;
  opt.B = 3;
  auto c = derive_params(sets, PolarParams::make(8, 0.25), SourceSpec::uniform_identity(), fam, opt);
  EXPECT_EQ(c.r, c.hash_length());
  EXPECT_EQ(c.hash_length(), 16u);
  EXPECT_EQ(c.randomizer_length(), 0u);
  EXPECT_NEAR(c.rate_theoretical, 1.0, 1e-12);
  EXPECT_EQ(c.l_otp, 0u);
  EXPECT_EQ(c.B0, 0u);
  EXPECT_EQ(c.total_message_bits(), c.B * c.r - (c.B - 1) * c.L * c.sets.V_UY.size());

  // main BEC(0.1), eve BEC(0.4): N(0.4 - backoff) bits
  auto fam2 = family_of(Dmc::bec(0.1), Dmc::bec(0.4));
  auto s2 = hand_sets(8, {0, 1, 2, 3, 4, 5, 6, 7}, {7}, {5, 6, 7});
  opt.backoff = 0.1;
  opt.xi = 0.01;
  auto c2 = derive_params(s2, PolarParams::make(8, 0.25), SourceSpec::uniform_identity(), fam2, opt);
  EXPECT_EQ(c2.r, 4u);  // floor(16 * 0.3)
  EXPECT_EQ(c2.l_otp, 2u * 3u * 2u + 2u * 1u);
  EXPECT_EQ(c2.l_key, 3u);  // floor(16 * (0.3 - 0.1 - 0.01))
  EXPECT_EQ(c2.B0, 5u);
  EXPECT_EQ(c2.message_length(0), 4u);
  EXPECT_EQ(c2.message_length(1), 2u);
  EXPECT_NEAR(c2.achieved_rate(), (3 * 4.0 - 2 * 2.0) / (3 * 16.0), 1e-12);
}

TEST(DeriveParams, Errors) {
  auto fam = family_of(Dmc::bec(0.1), Dmc::bec(0.4));
  auto s = hand_sets(8, {4, 5, 6, 7}, {4, 5, 6, 7}, {4, 5, 6, 7});
  DeriveOptions opt;
  opt.backoff = 0.3;
  // budget 8 * 0.1 < |V_UY| = 4
  EXPECT_THROW(derive_params(s, PolarParams::make(8, 0.25), SourceSpec::uniform_identity(), fam, opt),
               std::invalid_argument);
  opt.backoff = 0;
  opt.r_override = 5;
  EXPECT_THROW(derive_params(s, PolarParams::make(8, 0.25), SourceSpec::uniform_identity(), fam, opt),
               std::invalid_argument);
  opt.r_override.reset();
  opt.alpha = Fraction::parse("1/3");
  EXPECT_THROW(derive_params(s, PolarParams::make(8, 0.25), SourceSpec::uniform_identity(), fam, opt),
               std::invalid_argument);
}

TEST(Session, NoiselessRoundTripRandomConfigs) {
  std::mt19937_64 g(21);
  RngSource rng(5);
  auto fam = family_of(Dmc::noiseless(), Dmc::bsc(0.2));
  for (int trial = 0; trial < 24; ++trial) {
    const std::size_t K = (g() & 1) ? 4 : 8;
    const std::size_t L = 1 + g() % 2, B = 1 + g() % 3;
    // random nested sets V_UY within V_U, H_UY containing V_UY
    IndexSet V_U, V_UY, H_UY;
    for (std::size_t i = 0; i < K; ++i) {
      if (g() % 3) V_U.push_back(i);
    }
    if (V_U.empty()) V_U.push_back(K - 1);
    for (auto i : V_U)
      if (g() % 3 == 0) V_UY.push_back(i);
    for (std::size_t i = 0; i < K; ++i)
      if (std::binary_search(V_UY.begin(), V_UY.end(), i) || g() % 2) H_UY.push_back(i);
    auto sets = hand_sets(K, V_U, V_UY, H_UY);
    const std::size_t lo = L * V_UY.size(), hi = L * V_U.size();
    const std::size_t r = lo + g() % (hi - lo + 1);
    auto code = small_code(sets, fam, L, B, r);
    auto key = random_key(code.config.l_otp, rng);
    auto msgs = draw_messages(code.config, rng);
    auto tr = encode_session(code, msgs, key, fam, {}, {rng, rng});
    for (std::size_t b = 0; b < B; ++b) {
      ASSERT_EQ(tr.blocks[b].u, [&] {
        BitVector u;
        for (std::size_t l = 0; l < L; ++l) append(u, transform(slice(tr.blocks[b].a, l * K, K)));
        return u;
      }());
    }
    EXPECT_EQ(tr.otp_ciphertext.size(), code.config.l_otp);
    EXPECT_EQ(decode_session(code, receiver_view(tr), key), msgs) << "trial " << trial;
  }
}

TEST(Session, LengthChecks) {
  auto fam = family_of(Dmc::noiseless(), blind());
  auto code = small_code(hand_sets(4, {1, 2, 3}, {3}, {2, 3}), fam, 1, 2, 2);
  RngSource rng(1);
  auto key = random_key(code.config.l_otp, rng);
  auto msgs = draw_messages(code.config, rng);
  EXPECT_EQ(msgs[0].size(), 2u);
  EXPECT_EQ(msgs[1].size(), 1u);
  auto bad = msgs;
  bad[1].push_back(0);
  EXPECT_THROW(encode_session(code, bad, key, fam, {}, {rng, rng}), std::invalid_argument);
  KeyMaterial short_key{BitVector(code.config.l_otp - 1, 0), "test"};
  EXPECT_THROW(encode_session(code, msgs, short_key, fam, {}, {rng, rng}), std::invalid_argument);
}

TEST(Session, SingleBlockHasNoChaining) {
  auto fam = family_of(Dmc::noiseless(), blind());
  auto code = small_code(hand_sets(8, {2, 3, 5, 6, 7}, {7}, {6, 7}), fam, 1, 1, 3);
  EXPECT_EQ(code.config.message_length(0), code.config.r);
  RngSource rng(2);
  auto key = random_key(code.config.l_otp, rng);
  auto msgs = draw_messages(code.config, rng);
  auto tr = encode_session(code, msgs, key, fam, {}, {rng, rng});
  // T_1 hashes back to M_1 || R'_1 with no M' part
  auto p = gf_mul(FieldElem::from_bits(tr.blocks[0].r), FieldElem::from_bits(tr.blocks[0].t), code.config.hash_field);
  EXPECT_EQ(p.bits(), concat({msgs[0], tr.blocks[0].r_prime}));
}

TEST(Session, HashPreimageIsUniform) {
  // T = R^{-1} (M || M' || R') enumerated over every input: exactly uniform
  auto fam = family_of(Dmc::noiseless(), blind());
  auto code = small_code(hand_sets(4, {0, 1, 2, 3}, {3}, {3}), fam, 1, 2, 2);
  const auto& c = code.config;
  std::map<BitVector, double> law;
  for (unsigned m = 0; m < 2; ++m)
    for (unsigned mp = 0; mp < 2; ++mp) {
      ChoiceExplorer ex;
      while (ex.next_path()) {
        auto rec = encode_block(code, BitVector{Bit(m)}, BitVector{Bit(mp)}, fam, {}, {ex, ex});
        law[rec.t] += 0.25 * ex.path_probability();
      }
    }
  ASSERT_EQ(c.hash_length(), 4u);
  ASSERT_EQ(law.size(), 16u);
  for (auto& [t, p] : law) EXPECT_NEAR(p, 1.0 / 16, 1e-12);
}

TEST(Session, CorruptedPadBreaksEveryBlock) {
  auto fam = family_of(Dmc::noiseless(), blind());
  auto code = small_code(hand_sets(8, {1, 2, 3, 4, 5, 6, 7}, {5, 6, 7}, {4, 5, 6, 7}), fam, 2, 3, 10);
  RngSource rng(3);
  int all_wrong = 0;
  for (int t = 0; t < 20; ++t) {
    auto key = random_key(code.config.l_otp, rng);
    auto msgs = draw_messages(code.config, rng);
    auto tr = encode_session(code, msgs, key, fam, {}, {rng, rng});
    auto view = receiver_view(tr);
    ASSERT_EQ(decode_session(code, view, key), msgs);
    // flip the block-B chained bits at the end of the pad
    KeyMaterial wrong = key;
    for (std::size_t i = code.config.l_otp - code.config.L * code.config.e_len; i < code.config.l_otp; ++i)
      wrong.bits[i] ^= 1;
    auto out = decode_session(code, view, wrong);
    bool every = true;
    for (std::size_t b = 0; b < code.config.B; ++b) every = every && out[b] != msgs[b];
    all_wrong += every;
  }
  EXPECT_GE(all_wrong, 15);
}

TEST(InitPhase, NoiselessKeysAgree) {
  auto fam = family_of(Dmc::noiseless(), blind());
  auto code = small_code(hand_sets(8, {1, 2, 3, 4, 5, 6, 7}, {6, 7}, {4, 5, 6, 7}), fam, 2, 2, 4);
  ASSERT_GT(code.config.B0, 0u);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngSource enc(seed), ch(seed + 100);
    auto res = init_phase(code, fam, {}, {enc, ch});
    EXPECT_TRUE(res.agreed());
    EXPECT_EQ(res.transmitter.bits.size(), code.config.l_otp);
    EXPECT_EQ(res.transcript.blocks.size(), code.config.B0);
    auto msgs = draw_messages(code.config, enc);
    auto tr = encode_session(code, msgs, res.transmitter, fam, {}, {enc, ch});
    EXPECT_EQ(decode_session(code, receiver_view(tr), res.receiver), msgs);
  }
}

TEST(InitPhase, IdentityHashKeepsLeftmostBits) {
  auto fam = family_of(Dmc::noiseless(), blind());
  auto code = small_code(hand_sets(8, {1, 2, 3, 4, 5, 6, 7}, {6, 7}, {4, 5, 6, 7}), fam, 2, 2, 4);
  RngSource rng(4);
  auto u = rng.uniform_bits(code.config.N());
  BitVector one(code.config.N() - 1, 0);
  one.push_back(1);
  auto key = derive_key(code.config, one, u);
  EXPECT_EQ(key, slice(u, 0, code.config.l_key));
}

TEST(InitPhase, BecKeyAgreement) {
  auto fam = family_of(Dmc::bec(0.1), Dmc::bec(0.4));
  auto src = SourceSpec::uniform_identity();
  auto params = PolarParams::make(1024, 0.4);
  auto sets = construct_index_sets(src, fam.mains[0], params, {ProfileMode::monte_carlo, 20000, 11, 1});
  DeriveOptions opt;
  opt.L = 4;
  opt.B = 1;
  opt.backoff = 0.15;
  auto cfg = derive_params(sets, params, src, fam, opt);
  cfg.B0 = 2;  // fixed block count for this check
  cfg.l_otp = std::min(cfg.l_otp, 2 * cfg.l_key);
  WiretapCode code;
  code.coder = std::make_shared<PlainSideInfoCoder>(cfg.sets, src, fam.mains[0]);
  code.aux = std::make_shared<PolarAuxTransport>(design_aux_code(fam.mains[0], 1024, {}));
  code.config = cfg;
  int agreed = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    RngSource enc(derive_seed(7, 2 * t)), ch(derive_seed(7, 2 * t + 1));
    agreed += init_phase(code, fam, {}, {enc, ch}).agreed();
  }
  EXPECT_GE(agreed, 95);
}

TEST(Exposure, TapAndStates) {
  auto fam = ChannelFamily{{Dmc::noiseless()}, {Dmc::noiseless(), blind()}, std::nullopt};
  IndexSets sets = hand_sets(4, {0, 1, 2, 3}, {}, {});
  DeriveOptions opt;
  opt.L = 2;
  opt.alpha = Fraction::parse("1/4");
  opt.r_override = 4;
  auto cfg = derive_params(sets, PolarParams::make(4, 0.25), SourceSpec::uniform_identity(), fam, opt);
  auto code = make_wiretap_code(cfg, fam, {});
  Exposure ex;
  ex.eve_states = Exposure::EveStates::alternating;
  RngSource rng(1);
  auto msgs = draw_messages(cfg, rng);
  auto tr = encode_session(code, msgs, {{}, "test"}, fam, ex, {rng, rng});
  const auto& blk = tr.blocks[0];
  EXPECT_EQ(blk.tap, (IndexSet{0, 1}));
  EXPECT_EQ(blk.tap_values, slice(blk.x, 0, 2));
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(blk.eve_states[i], i % 2);
    if (i % 2 == 0) EXPECT_EQ(blk.z[i], blk.x[i]);
  }
}
