#include <gtest/gtest.h>

#include <map>
#include <numeric>

#include "wiretap/compound.hpp"

using namespace wiretap;

namespace {

IndexSet random_subset(const IndexSet& from, RngSource& rng) {
  IndexSet out;
  for (auto i : from)
    if (rng.uniform_bits(1)[0]) out.push_back(i);
  return out;
}

IndexSet all_of(std::size_t K) {
  IndexSet a(K);
  std::iota(a.begin(), a.end(), 0);
  return a;
}

// Noiseless side information: every polarized bit is determined by y.
CompoundSpec random_spec(std::size_t K, std::vector<std::size_t> mult, RngSource& rng) {
  CompoundSpec s;
  s.K = K;
  s.multipliers = std::move(mult);
  s.V = random_subset(all_of(K), rng);
  const Dmc clean = Dmc::noiseless();
  for (std::size_t j = 0; j < s.multipliers.size(); ++j) {
    IndexSet v = random_subset(s.V, rng);
    s.H.push_back(set_union(v, random_subset(all_of(K), rng)));
    s.Vj.push_back(std::move(v));
    s.laws.push_back(role_law(Role::U_given_Y, SourceSpec::uniform_identity(), &clean));
  }
  return s;
}

BitVector pad_xor(const BitVector& a, const BitVector& b) {
  BitVector out(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] ^= a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] ^= b[i];
  return out;
}

BitVector pick(const BitVector& a, std::size_t piece, std::size_t K, const IndexSet& s) {
  BitVector out;
  for (auto i : s) out.push_back(a[piece * K + i]);
  return out;
}

}  // namespace

TEST(EuclidSplit, Arithmetic) {
  EXPECT_EQ(euclid_split(13, 4), (std::vector<std::size_t>{4, 3, 3, 3}));
  EXPECT_EQ(euclid_split(12, 4), (std::vector<std::size_t>{3, 3, 3, 3}));
  EXPECT_EQ(euclid_split(2, 3), (std::vector<std::size_t>{1, 1, 0}));
  EXPECT_EQ(euclid_split(0, 1), (std::vector<std::size_t>{0}));
  EXPECT_THROW(euclid_split(5, 0), std::invalid_argument);
}

TEST(Css, StraightLineOracleTwoDecoders) {
  // J=2, t_2=2, K=4: E = [A_1[V_1], A_2[V_1] (+) A_1[V_2], A_2[V_2]]
  const Dmc clean = Dmc::noiseless();
  CompoundSpec s;
  s.K = 4;
  s.multipliers = {1, 2};
  s.V = {0, 1, 2, 3};
  s.Vj = {{1}, {0, 2, 3}};
  s.H = {{1, 2}, {0, 2, 3}};
  s.laws.assign(2, role_law(Role::U_given_Y, SourceSpec::uniform_identity(), &clean));
  EXPECT_EQ(s.e_length(), 1u + 3u + 3u);
  EXPECT_EQ(s.e_prime_length(), 2u);
  RngSource rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    BitVector a = rng.uniform_bits(8);
    auto c = css_encode_polar(a, s);
    BitVector expect = {a[1]};
    append(expect, pad_xor({a[4 + 1]}, {a[0], a[2], a[3]}));
    append(expect, BitVector{a[4 + 0], a[4 + 2], a[4 + 3]});
    EXPECT_EQ(c.E, expect);
    EXPECT_EQ(c.E_prime, (BitVector{a[2], a[4 + 2]}));
  }
}

TEST(Css, StraightLineOracleThreeDecoders) {
  // J=3, t = (1, 2, 2). Level 2 over pieces (p, p+1):
  //   e2(p) = [A_p[V1], A_{p+1}[V1] (+) A_p[V2], A_{p+1}[V2]]
  //   f2(p) = [A_p[V3], A_{p+1}[V3]]
  // e3 = [e2(0), e2(2) (+) f2(0), f2(2)]
  const Dmc clean = Dmc::noiseless();
  CompoundSpec s;
  s.K = 4;
  s.multipliers = {1, 2, 2};
  s.V = {0, 1, 2, 3};
  s.Vj = {{0, 1}, {3}, {1, 2}};
  s.H = s.Vj;
  s.laws.assign(3, role_law(Role::U_given_Y, SourceSpec::uniform_identity(), &clean));
  RngSource rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    BitVector a = rng.uniform_bits(16);
    auto e2 = [&](std::size_t p) {
      BitVector out = pick(a, p, 4, s.Vj[0]);
      append(out, pad_xor(pick(a, p + 1, 4, s.Vj[0]), pick(a, p, 4, s.Vj[1])));
      append(out, pick(a, p + 1, 4, s.Vj[1]));
      return out;
    };
    auto f2 = [&](std::size_t p) {
      BitVector out = pick(a, p, 4, s.Vj[2]);
      append(out, pick(a, p + 1, 4, s.Vj[2]));
      return out;
    };
    BitVector expect = e2(0);
    append(expect, pad_xor(e2(2), f2(0)));
    append(expect, f2(2));
    EXPECT_EQ(css_encode_polar(a, s).E, expect);
    EXPECT_EQ(s.e_length(), expect.size());
  }
}

TEST(Css, ExhaustiveMultipliersRoundTrip) {
  RngSource rng(7);
  std::size_t configs = 0;
  for (std::size_t K : {2u, 4u, 8u}) {
    std::vector<std::vector<std::size_t>> mults = {{1}};
    for (std::size_t t2 = 1; t2 <= 3; ++t2) {
      mults.push_back({1, t2});
      for (std::size_t t3 = 1; t3 <= 3; ++t3) mults.push_back({1, t2, t3});
    }
    for (const auto& m : mults) {
      for (int rep = 0; rep < 4; ++rep) {
        auto s = random_spec(K, m, rng);
        ++configs;
        for (int trial = 0; trial < 5; ++trial) {
          BitVector u = rng.uniform_bits(s.length());
          auto c = css_encode(u, s);
          ASSERT_EQ(c.E.size(), s.e_length());
          ASSERT_EQ(c.E_prime.size(), s.e_prime_length());
          std::vector<std::uint32_t> y(u.begin(), u.end());
          for (std::size_t j0 = 1; j0 <= s.J(); ++j0) ASSERT_EQ(css_decode(j0, y, c.E, c.E_prime, s), u) << "decoder " << j0;
        }
      }
    }
  }
  EXPECT_EQ(configs, 3u * 13u * 4u);
}

TEST(Css, WrongSideBitsAreNoticed) {
  // Decoders trust E: flipping a chained bit changes the output.
  RngSource rng(8);
  CompoundSpec s = random_spec(4, {1, 2}, rng);
  while (s.e_length() == 0) s = random_spec(4, {1, 2}, rng);
  BitVector u = rng.uniform_bits(s.length());
  auto c = css_encode(u, s);
  c.E[0] ^= 1;
  std::vector<std::uint32_t> y(u.begin(), u.end());
  bool any = false;
  for (std::size_t j0 = 1; j0 <= 2; ++j0) any |= css_decode(j0, y, c.E, c.E_prime, s) != u;
  EXPECT_TRUE(any);
  EXPECT_THROW(css_decode(0, y, c.E, c.E_prime, s), std::out_of_range);
  EXPECT_THROW(css_decode(3, y, c.E, c.E_prime, s), std::out_of_range);
}

TEST(Css, ChainedPartIsUniform) {
  // u uniform over 2^8: E is uniform on its range, and so is (E, E' + R')
  // with R' uniform. V_1 and V_2 overlap, so the range is a proper subspace.
  const Dmc clean = Dmc::noiseless();
  CompoundSpec s;
  s.K = 4;
  s.multipliers = {1, 2};
  s.V = {0, 1, 2, 3};
  s.Vj = {{2, 3}, {1, 3}};
  s.H = {{0, 2, 3}, {1, 2, 3}};
  s.laws.assign(2, role_law(Role::U_given_Y, SourceSpec::uniform_identity(), &clean));
  const std::size_t ne = s.e_length(), np = s.e_prime_length();
  ASSERT_EQ(ne, 2u + 2u + 2u);
  ASSERT_EQ(np, 4u);
  std::map<BitVector, int> e_counts, joint;
  for (unsigned x = 0; x < 256; ++x) {
    BitVector u(8);
    for (int i = 0; i < 8; ++i) u[i] = (x >> i) & 1;
    auto c = css_encode(u, s);
    ++e_counts[c.E];
    for (unsigned r = 0; r < (1u << np); ++r) {
      BitVector key = c.E;
      for (std::size_t i = 0; i < np; ++i) key.push_back(c.E_prime[i] ^ ((r >> i) & 1));
      ++joint[key];
    }
  }
  // rank 5: A_2[3] + A_1[3] is the sum of two other chained bits
  EXPECT_EQ(e_counts.size(), 32u);
  for (auto& [k, n] : e_counts) EXPECT_EQ(n, 256 / 32);
  EXPECT_EQ(joint.size(), 32u << np);
  for (auto& [k, n] : joint) EXPECT_EQ(n, 256 / 32);
}

TEST(Ccc, NoiselessRoundTrip) {
  RngSource rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    auto s = random_spec(8, {1, 2}, rng);
    while (s.e_length() > 16) s = random_spec(8, {1, 2}, rng);
    s.V = all_of(8);
    auto ccc = CompoundChannelCode::from_spec(s);
    std::size_t total = 0;
    for (auto& a : ccc.chain_sets()) total += a.size();
    EXPECT_EQ(total, s.e_length());
    std::vector<BitVector> msgs;
    for (int b = 0; b < 3; ++b) msgs.push_back(rng.uniform_bits(ccc.message_length()));
    auto enc = ccc.encode(msgs, rng);
    ASSERT_EQ(enc.codewords.size(), 3u * 2u);
    std::vector<Symbols> y;
    for (auto& cw : enc.codewords) y.emplace_back(cw.begin(), cw.end());
    for (std::size_t j = 1; j <= 2; ++j) EXPECT_EQ(ccc.decode(j, y, enc.e_last, enc.e_prime), msgs);
  }
}

TEST(Ccc, NoisyTwoChannels) {
  std::vector<Dmc> mains = {Dmc::bsc(0.05), Dmc::bec(0.15)};
  ProfileOptions po{ProfileMode::monte_carlo, 4000, 3, 1};
  auto ccc = CompoundChannelCode::build(mains, 256, {1, 2}, 0.45, po);
  EXPECT_GT(ccc.message_length(), 0u);
  RngSource rng(10);
  int errors[2] = {0, 0};
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<BitVector> msgs;
    for (int b = 0; b < 2; ++b) msgs.push_back(rng.uniform_bits(ccc.message_length()));
    auto enc = ccc.encode(msgs, rng);
    for (std::size_t j = 0; j < 2; ++j) {
      std::vector<Symbols> y;
      for (auto& cw : enc.codewords) y.push_back(transmit_dmc(cw, mains[j], rng));
      if (ccc.decode(j + 1, y, enc.e_last, enc.e_prime) != msgs) ++errors[j];
    }
  }
  EXPECT_LE(errors[0], 2);
  EXPECT_LE(errors[1], 2);
}

namespace {

void expect_same(const BlockRecord& a, const BlockRecord& b) {
  EXPECT_EQ(a.t, b.t);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.r, b.r);
  EXPECT_EQ(a.r_prime, b.r_prime);
  EXPECT_EQ(a.e, b.e);
  EXPECT_EQ(a.e_prime, b.e_prime);
  EXPECT_EQ(a.tap, b.tap);
}

}  // namespace

TEST(CompoundWiretap, SingleMainMatchesPlainCode) {
  ChannelFamily fam{{Dmc::bec(0.2)}, {Dmc::bec(0.7)}, std::nullopt};
  const auto source = SourceSpec::uniform_identity();
  CompoundOptions opt;
  opt.multipliers = {1};
  opt.params = PolarParams::make(64, 0.35);
  opt.profile = {ProfileMode::monte_carlo, 2000, 11, 1};
  opt.derive.L = 2;
  opt.derive.B = 2;
  opt.derive.backoff = 0.05;
  opt.aux.samples = 2000;
  auto comp = make_compound_wiretap_code(source, fam, opt);

  auto sets = construct_index_sets(source, fam.mains[0], opt.params, opt.profile);
  auto plain = make_wiretap_code(derive_params(sets, opt.params, source, fam, opt.derive), fam, opt.aux);
  EXPECT_EQ(comp.config.r, plain.config.r);
  EXPECT_EQ(comp.config.l_otp, plain.config.l_otp);
  EXPECT_EQ(comp.config.B0, plain.config.B0);

  auto run = [&](const WiretapCode& code) {
    RngSource enc(21), ch(22);
    auto init = init_phase(code, fam, {}, {enc, ch});
    auto msgs = draw_messages(code.config, enc);
    auto tr = encode_session(code, msgs, init.transmitter, fam, {}, {enc, ch});
    return std::make_pair(init, tr);
  };
  auto [ia, ta] = run(comp);
  auto [ib, tb] = run(plain);
  EXPECT_EQ(ia.transmitter.bits, ib.transmitter.bits);
  EXPECT_EQ(ia.receiver.bits, ib.receiver.bits);
  ASSERT_EQ(ta.blocks.size(), tb.blocks.size());
  for (std::size_t b = 0; b < ta.blocks.size(); ++b) expect_same(ta.blocks[b], tb.blocks[b]);
  EXPECT_EQ(ta.otp_ciphertext, tb.otp_ciphertext);
  EXPECT_EQ(ta.otp_aux.received, tb.otp_aux.received);
}

TEST(CompoundWiretap, NoiselessTwoMainsRoundTrip) {
  ChannelFamily fam{{Dmc::noiseless(), Dmc::noiseless()}, {Dmc::bec(1.0)}, std::nullopt};
  const auto source = SourceSpec::uniform_identity();
  CompoundOptions opt;
  opt.multipliers = {1, 2};
  opt.params = PolarParams::make(8, 0.4);
  opt.profile = {ProfileMode::exact, 0, 1, 1};
  opt.derive.L = 1;
  opt.derive.B = 3;
  auto code = make_compound_wiretap_code(source, fam, opt);
  EXPECT_EQ(code.config.pieces, 2u);
  for (std::uint32_t t = 0; t < 2; ++t) {
    Exposure ex;
    ex.main_state = t;
    RngSource enc(30 + t), ch(40 + t);
    auto init = init_phase(code, fam, ex, {enc, ch});
    ASSERT_TRUE(init.agreed());
    auto msgs = draw_messages(code.config, enc);
    auto tr = encode_session(code, msgs, init.transmitter, fam, ex, {enc, ch});
    EXPECT_EQ(decode_session(code, receiver_view(tr), init.receiver), msgs);
  }
}
