#include <gtest/gtest.h>

#include <random>

#include "wiretap/info.hpp"
#include "wiretap/polar.hpp"

using namespace wiretap;

namespace {

// Generator matrix built directly as a Kronecker power.
Eigen::MatrixXi kron_generator(std::size_t K) {
  Eigen::MatrixXi g(1, 1);
  g(0, 0) = 1;
  while (static_cast<std::size_t>(g.rows()) < K) {
    const auto n = g.rows();
    Eigen::MatrixXi h = Eigen::MatrixXi::Zero(2 * n, 2 * n);
    h.topLeftCorner(n, n) = g;
    h.bottomLeftCorner(n, n) = g;
    h.bottomRightCorner(n, n) = g;
    g = h;
  }
  return g;
}

BitVector mul_generator(const BitVector& a, const Eigen::MatrixXi& g) {
  BitVector x(a.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i])
      for (std::size_t j = 0; j < a.size(); ++j) x[j] ^= g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return x;
}

BitVector bits_of(std::size_t v, std::size_t K) {
  BitVector b(K);
  for (std::size_t i = 0; i < K; ++i) b[i] = (v >> (K - 1 - i)) & 1u;
  return b;
}

// Brute-force joint law P(a, o) for one observation sequence.
std::vector<double> brute_joint(const BitLaw& law, const std::vector<std::uint32_t>& o) {
  const std::size_t K = o.size();
  const auto g = kron_generator(K);
  std::vector<double> pa(std::size_t{1} << K, 0.0);
  for (std::size_t ai = 0; ai < pa.size(); ++ai) {
    auto x = mul_generator(bits_of(ai, K), g);
    double p = 1.0;
    for (std::size_t i = 0; i < K; ++i) p *= law(x[i], o[i]);
    pa[ai] = p;
  }
  return pa;
}

BitLaw random_law(std::mt19937_64& g, int outputs) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  BitLaw law(2, outputs);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < outputs; ++c) law(r, c) = u(g);
  law /= law.sum();
  return law;
}

}  // namespace

TEST(Transform, TwoByTwo) {
  EXPECT_EQ(transform(BitVector{1, 0}), (BitVector{1, 0}));
  EXPECT_EQ(transform(BitVector{0, 1}), (BitVector{1, 1}));
  EXPECT_EQ(transform(BitVector(8, 0)), BitVector(8, 0));
  EXPECT_THROW(transform(BitVector(6, 0)), std::invalid_argument);
}

TEST(Transform, MatchesKroneckerGenerator) {
  std::mt19937_64 g(1);
  for (std::size_t K : {2u, 4u, 8u, 32u, 128u}) {
    auto gen = kron_generator(K);
    for (int t = 0; t < 20; ++t) {
      BitVector a(K);
      for (auto& b : a) b = g() & 1;
      EXPECT_EQ(transform(a), mul_generator(a, gen));
    }
  }
}

TEST(Transform, InvolutionLinearityAndPacked) {
  std::mt19937_64 g(2);
  const std::size_t K = 1024;
  for (int t = 0; t < 200; ++t) {
    BitVector u(K), v(K);
    for (std::size_t i = 0; i < K; ++i) {
      u[i] = g() & 1;
      v[i] = g() & 1;
    }
    EXPECT_EQ(transform(transform(u)), u);
    EXPECT_EQ(transform(xor_bits(u, v)), xor_bits(transform(u), transform(v)));
    auto w = pack(u);
    transform_packed(w, K);
    EXPECT_EQ(unpack(w, K), transform(u));
  }
  for (std::size_t K : {2u, 4u, 16u, 64u, 128u}) {
    BitVector u(K);
    for (auto& b : u) b = g() & 1;
    auto w = pack(u);
    transform_packed(w, K);
    EXPECT_EQ(unpack(w, K), transform(u)) << K;
  }
}

TEST(BoxPlus, FastPathsAndExactValue) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(box_plus(0.0, 3.0), 0.0);
  EXPECT_EQ(box_plus(inf, -2.0), -2.0);
  EXPECT_EQ(box_plus(inf, inf), inf);
  // direct probability-domain formula
  for (double a : {-3.0, -0.5, 0.7, 4.0})
    for (double b : {-2.0, 0.3, 1.5}) {
      double pa = 1 / (1 + std::exp(-a)), pb = 1 / (1 + std::exp(-b));
      double p = pa * pb + (1 - pa) * (1 - pb);
      EXPECT_NEAR(box_plus(a, b), std::log(p / (1 - p)), 1e-12);
    }
}

TEST(EntropyProfile, ExactSmallCases) {
  auto src = SourceSpec::uniform_identity();
  auto bec = Dmc::bec(0.5);
  auto p = entropy_profile(src, &bec, Role::U_given_Y, PolarParams::make(2, 0.25), {});
  ASSERT_EQ(p.K(), 2u);
  EXPECT_NEAR(p.h[0], 0.75, 1e-12);
  EXPECT_NEAR(p.h[1], 0.25, 1e-12);

  auto q = entropy_profile(src, nullptr, Role::U, PolarParams::make(8, 0.25), {});
  for (double v : q.h) EXPECT_NEAR(v, 1.0, 1e-12);
  EXPECT_THROW(entropy_profile(src, &bec, Role::U_given_Y, PolarParams::make(16, 0.25), {}), std::invalid_argument);
}

TEST(EntropyProfile, ExactMatchesBruteForceOracle) {
  std::mt19937_64 g(4);
  for (int trial = 0; trial < 4; ++trial) {
    const std::size_t K = 4;
    const int m = 1 + trial % 3;
    auto law = random_law(g, m);
    auto prof = entropy_profile(law, K, {});
    // H(A^{1:i}, O) by enumeration
    std::vector<double> H(K + 1, 0.0);
    std::size_t no = 1;
    for (std::size_t i = 0; i < K; ++i) no *= static_cast<std::size_t>(m);
    for (std::size_t oi = 0; oi < no; ++oi) {
      std::vector<std::uint32_t> o(K);
      for (std::size_t i = 0, r = oi; i < K; ++i, r /= m) o[i] = static_cast<std::uint32_t>(r % m);
      auto pa = brute_joint(law, o);
      for (std::size_t len = 0; len <= K; ++len) {
        const std::size_t block = std::size_t{1} << (K - len);
        for (std::size_t start = 0; start < pa.size(); start += block) {
          double s = 0;
          for (std::size_t k = start; k < start + block; ++k) s += pa[k];
          H[len] += neg_xlog2x(s);
        }
      }
    }
    for (std::size_t i = 0; i < K; ++i) EXPECT_NEAR(prof.h[i], H[i + 1] - H[i], 1e-10);
  }
}

TEST(EntropyProfile, MonteCarloNearExact) {
  SourceSpec src = SourceSpec::from_conditional(0.11, 0.0);
  auto params = PolarParams::make(4, 0.25);
  auto exact = entropy_profile(src, nullptr, Role::U, params, {});
  ProfileOptions mc{ProfileMode::monte_carlo, 100000, 42, 1};
  auto est = entropy_profile(src, nullptr, Role::U, params, mc);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(est.h[i], exact.h[i], 0.02);
  EXPECT_EQ(est.samples, 100000u);
  EXPECT_EQ(est.seed, 42u);
  EXPECT_THROW(entropy_profile(src, nullptr, Role::U, params, {ProfileMode::monte_carlo, 10, 1, 1}),
               std::invalid_argument);
}

TEST(EntropyProfile, MonteCarloThreadIndependent) {
  auto src = SourceSpec::uniform_identity();
  auto ch = Dmc::bsc(0.11);
  auto params = PolarParams::make(64, 0.25);
  auto a = entropy_profile(src, &ch, Role::U_given_Y, params, {ProfileMode::monte_carlo, 5000, 9, 1});
  auto b = entropy_profile(src, &ch, Role::U_given_Y, params, {ProfileMode::monte_carlo, 5000, 9, 3});
  EXPECT_EQ(a.h, b.h);
}

TEST(ScPosterior, MatchesBruteForceAllPrefixes) {
  std::mt19937_64 g(8);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t K = std::size_t{2} << (trial % 3);  // 2, 4, 8
    const int m = 1 + trial % 3;
    auto law = random_law(g, m);
    for (int obs_trial = 0; obs_trial < 6; ++obs_trial) {
      std::vector<std::uint32_t> o(K);
      for (auto& v : o) v = static_cast<std::uint32_t>(g() % static_cast<unsigned>(m));
      auto pa = brute_joint(law, o);
      for (std::size_t j = 0; j < K; ++j) {
        const std::size_t plen = j;
        for (std::size_t pv = 0; pv < (std::size_t{1} << plen); ++pv) {
          BitVector prefix(plen);
          for (std::size_t i = 0; i < plen; ++i) prefix[i] = (pv >> (plen - 1 - i)) & 1u;
          double p0 = 0, p1 = 0;
          const std::size_t rest = K - plen - 1;
          for (std::size_t tail = 0; tail < (std::size_t{1} << rest); ++tail) {
            p0 += pa[(pv << (rest + 1)) | tail];
            p1 += pa[(pv << (rest + 1)) | (std::size_t{1} << rest) | tail];
          }
          double got = sc_posterior(prefix, o, j, law);
          ASSERT_NEAR(got, p0 / (p0 + p1), 1e-10) << "K=" << K << " j=" << j;
        }
      }
    }
  }
}

TEST(ScPosterior, SymmetricCases) {
  auto src = SourceSpec::uniform_identity();
  auto bec = Dmc::bec(0.3);
  auto law = role_law(Role::U_given_Y, src, &bec);
  std::vector<std::uint32_t> erased{2, 2};
  EXPECT_NEAR(sc_posterior({}, erased, 0, law), 0.5, 1e-15);
  auto ulaw = role_law(Role::U, src, nullptr);
  std::vector<std::uint32_t> none(8, 0);
  for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(sc_posterior(BitVector(j, 1), none, j, ulaw), 0.5, 1e-15);
  // zero-probability prefix
  auto det = role_law(Role::U, SourceSpec::from_conditional(0.0, 0.0), nullptr);
  EXPECT_THROW(sc_posterior(BitVector{1}, std::vector<std::uint32_t>(2, 0), 1, det), std::domain_error);
}

TEST(ScSample, ReproducesProductLawWithoutFrozenBits) {
  auto law = role_law(Role::U, SourceSpec::from_conditional(0.3, 0.0), nullptr);
  for (std::size_t K : {2u, 4u}) {
    std::vector<std::uint32_t> obs(K, 0);
    std::vector<double> induced(std::size_t{1} << K, 0.0);
    ChoiceExplorer ex;
    while (ex.next_path()) {
      auto a = sc_sample({}, obs, law, SampleMode::random, {}, ex);
      auto x = transform(a);
      std::size_t idx = 0;
      for (auto b : x) idx = (idx << 1) | b;
      induced[idx] += ex.path_probability();
    }
    for (std::size_t v = 0; v < induced.size(); ++v) {
      double q = 1.0;
      for (std::size_t i = 0; i < K; ++i) q *= ((v >> i) & 1u) ? 0.3 : 0.7;
      EXPECT_NEAR(induced[v], q, 1e-12);
    }
  }
}

TEST(ScSample, FrozenAndArgmax) {
  auto law = role_law(Role::U, SourceSpec::from_conditional(0.2, 0.0), nullptr);
  std::vector<std::uint32_t> obs(4, 0);
  RngSource rng(1);
  KnownBits all{{0, 1, 2, 3}, {1, 0, 1, 1}};
  EXPECT_EQ(sc_sample(all, obs, law, SampleMode::random, {}, rng), (BitVector{1, 0, 1, 1}));
  // argmax everywhere gives the most likely sequence (all zeros in the x domain)
  auto a = sc_sample({}, obs, law, SampleMode::argmax, {0, 1, 2, 3}, rng);
  EXPECT_EQ(transform(a), BitVector(4, 0));
}

TEST(ScDecode, TrivialCases) {
  auto src = SourceSpec::uniform_identity();
  auto clean = Dmc::noiseless();
  auto law = role_law(Role::U_given_Y, src, &clean);
  std::mt19937_64 g(3);
  BitVector a(16);
  for (auto& b : a) b = g() & 1;
  auto x = transform(a);
  std::vector<std::uint32_t> y(x.begin(), x.end());
  EXPECT_EQ(sc_decode_si(y, {}, {}, law), a);
  KnownBits all;
  for (std::size_t i = 0; i < 16; ++i) {
    all.positions.push_back(i);
    all.values.push_back(a[i] ^ 1);
  }
  EXPECT_EQ(sc_decode_si(y, all, {}, law), all.values);
  EXPECT_THROW(sc_decode_si(y, {}, {3}, law), std::invalid_argument);
}

TEST(IndexSets, TrivialProfiles) {
  auto params = PolarParams::make(8, 0.25);
  EntropyProfile ones{std::vector<double>(8, 1.0)}, zeros{std::vector<double>(8, 0.0)};
  std::map<Role, EntropyProfile> m{{Role::U, ones}, {Role::U_given_Y, zeros}, {Role::X, ones}, {Role::X_given_U, zeros}};
  auto s = build_index_sets(m, params);
  EXPECT_EQ(s.V_U.size(), 8u);
  EXPECT_TRUE(s.H_UY.empty());
  EXPECT_TRUE(s.V_UY.empty());
  m.erase(Role::X);
  EXPECT_THROW(build_index_sets(m, params), std::invalid_argument);
}

TEST(IndexSets, RepairAndStrictThreshold) {
  auto params = PolarParams::make(4, 0.25);
  const double d = params.delta();
  EntropyProfile u{{1.0, 1.0 - d, 0.5, 0.0}};
  EntropyProfile uy{{1.0, 1.0, d, 0.0}};
  EntropyProfile x{{1, 1, 1, 1}};
  EntropyProfile xu{{0, 0, 0, 0}};
  auto s = build_index_sets({{Role::U, u}, {Role::U_given_Y, uy}, {Role::X, x}, {Role::X_given_U, xu}}, params);
  EXPECT_EQ(s.V_U, (IndexSet{0}));        // 1-d itself is excluded
  EXPECT_EQ(s.V_UY, (IndexSet{0}));       // index 1 repaired away
  EXPECT_EQ(s.H_UY, (IndexSet{0, 1}));    // d itself excluded
  EXPECT_EQ(s.repairs, 1u);
}

TEST(IndexSets, BecConstructionSize) {
  auto src = SourceSpec::uniform_identity();
  auto bec = Dmc::bec(0.4);
  auto params = PolarParams::make(1024, 0.1);
  auto p = entropy_profile(src, &bec, Role::U_given_Y, params, {ProfileMode::monte_carlo, 20000, 5, 1});
  auto h = threshold_set(p, params.delta());
  EXPECT_GE(h.size() / 1024.0, 0.30);
  EXPECT_LE(h.size() / 1024.0, 0.50);
}

TEST(ScDecode, BecBlockErrorWithHighEntropySetKnown) {
  auto src = SourceSpec::uniform_identity();
  auto bec = Dmc::bec(0.4);
  auto params = PolarParams::make(1024, 0.35);
  auto law = role_law(Role::U_given_Y, src, &bec);
  auto p = entropy_profile(law, 1024, {ProfileMode::monte_carlo, 20000, 6, 1});
  auto hset = threshold_set(p, params.delta());
  RngSource rng(77);
  int errors = 0;
  for (int t = 0; t < 200; ++t) {
    auto a = rng.uniform_bits(1024);
    auto x = transform(a);
    auto y = transmit_dmc(x, bec, rng);
    KnownBits known{hset, gather(a, hset)};
    errors += sc_decode_si(y, known, hset, law) != a;
  }
  EXPECT_LE(errors, 10);
}

TEST(ChannelCode, NoiselessAndBec) {
  auto clean = Dmc::noiseless();
  auto code = PolarChannelCode::design(clean, 64, 1.0, 1000, 1);
  RngSource rng(5);
  auto m = rng.uniform_bits(64);
  auto cw = code.encode(m);
  std::vector<std::uint32_t> y(cw.begin(), cw.end());
  EXPECT_EQ(code.decode(y), m);

  auto bec = Dmc::bec(0.3);
  auto c2 = PolarChannelCode::design(bec, 1024, 0.5, 20000, 2);
  int errors = 0;
  for (int t = 0; t < 200; ++t) {
    auto msg = rng.uniform_bits(c2.info_length());
    auto out = transmit_dmc(c2.encode(msg), bec, rng);
    errors += c2.decode(out) != msg;
  }
  EXPECT_LE(errors, 10);
  EXPECT_THROW(PolarChannelCode::design(bec, 1024, 0.95, 20000, 2), std::invalid_argument);

  auto payload = rng.uniform_bits(1000);
  auto cws = c2.encode_stream(payload);
  std::vector<Symbols> rx;
  for (auto& c : cws) rx.push_back(Symbols(c.begin(), c.end()));
  EXPECT_EQ(c2.decode_stream(rx, 1000), payload);
}
