#include "wiretap/polar.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "wiretap/info.hpp"

namespace wiretap {

PolarParams PolarParams::make(std::size_t K, double beta) {
  if (!is_power_of_two(K) || K < 2) throw std::invalid_argument("block length must be a power of two >= 2");
  if (!(beta > 0.0 && beta < 0.5)) throw std::invalid_argument("beta must lie in (0, 1/2)");
  return {K, beta};
}

SourceSpec SourceSpec::uniform_identity() {
  SourceSpec s;
  s.q << 0.5, 0.0, 0.0, 0.5;
  return s;
}

SourceSpec SourceSpec::from_joint(const Eigen::Matrix2d& q) {
  SourceSpec s{q};
  s.validate();
  return s;
}

SourceSpec SourceSpec::from_conditional(double pu, double flip) {
  SourceSpec s;
  s.q << (1 - pu) * (1 - flip), (1 - pu) * flip, pu * flip, pu * (1 - flip);
  s.validate();
  return s;
}

void SourceSpec::validate() const {
  if ((q.array() < 0.0).any()) throw std::invalid_argument("source table has negative entries");
  if (std::abs(q.sum() - 1.0) > 1e-12) throw std::invalid_argument("source table does not sum to 1");
}

std::string to_string(Role r) {
  switch (r) {
    case Role::U: return "U";
    case Role::U_given_Y: return "U|Y";
    case Role::X: return "X";
    case Role::X_given_U: return "X|U";
    case Role::X_given_Y: return "X|Y";
  }
  return "?";
}

Role parse_role(const std::string& name) {
  for (Role r : {Role::U, Role::U_given_Y, Role::X, Role::X_given_U, Role::X_given_Y})
    if (to_string(r) == name) return r;
  throw std::invalid_argument("unknown role '" + name + "'");
}

BitLaw role_law(Role role, const SourceSpec& source, const Dmc* channel) {
  switch (role) {
    case Role::U: return source.qu();
    case Role::X: return source.qx();
    case Role::X_given_U: return source.q.transpose();
    case Role::U_given_Y:
      if (!channel) throw std::invalid_argument("role U|Y needs a side channel");
      return source.q * channel->table;
    case Role::X_given_Y:
      if (!channel) throw std::invalid_argument("role X|Y needs a channel");
      return 0.5 * channel->table;
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------

void transform_inplace(std::span<Bit> x) {
  const std::size_t K = x.size();
  if (!is_power_of_two(K)) throw std::invalid_argument("transform length must be a power of two");
  for (std::size_t h = 1; h < K; h <<= 1)
    for (std::size_t s = 0; s < K; s += 2 * h)
      for (std::size_t i = s; i < s + h; ++i) x[i] ^= x[i + h];
}

BitVector transform(std::span<const Bit> bits) {
  BitVector x(bits.begin(), bits.end());
  transform_inplace(x);
  return x;
}

void transform_packed(std::span<std::uint64_t> w, std::size_t K) {
  if (!is_power_of_two(K)) throw std::invalid_argument("transform length must be a power of two");
  if (w.size() != (K + 63) / 64) throw std::invalid_argument("packed buffer size does not match K");
  static constexpr std::uint64_t masks[6] = {0x5555555555555555ull, 0x3333333333333333ull, 0x0F0F0F0F0F0F0F0Full,
                                             0x00FF00FF00FF00FFull, 0x0000FFFF0000FFFFull, 0x00000000FFFFFFFFull};
  for (unsigned s = 0; s < 6 && (std::size_t{1} << s) < K; ++s) {
    const unsigned h = 1u << s;
    for (auto& v : w) v ^= (v >> h) & masks[s];
  }
  for (std::size_t hw = 1; hw * 64 < K; hw <<= 1)
    for (std::size_t b = 0; b < w.size(); b += 2 * hw)
      for (std::size_t i = b; i < b + hw; ++i) w[i] ^= w[i + hw];
}

std::vector<double> law_llr(const BitLaw& law) {
  std::vector<double> l(static_cast<std::size_t>(law.cols()));
  for (Eigen::Index o = 0; o < law.cols(); ++o) {
    const double p0 = law(0, o), p1 = law(1, o);
    if (p0 == 0.0 && p1 == 0.0)
      l[static_cast<std::size_t>(o)] = std::numeric_limits<double>::quiet_NaN();
    else if (p1 == 0.0)
      l[static_cast<std::size_t>(o)] = std::numeric_limits<double>::infinity();
    else if (p0 == 0.0)
      l[static_cast<std::size_t>(o)] = -std::numeric_limits<double>::infinity();
    else
      l[static_cast<std::size_t>(o)] = std::log(p0) - std::log(p1);
  }
  return l;
}

std::vector<double> observation_llr(const BitLaw& law, std::span<const std::uint32_t> obs) {
  const auto table = law_llr(law);
  std::vector<double> l(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs[i] >= table.size()) throw std::out_of_range("observation symbol outside the law's alphabet");
    l[i] = table[obs[i]];
  }
  return l;
}

// ---------------------------------------------------------------------------

std::string to_string(ProfileMode m) { return m == ProfileMode::exact ? "exact" : "monte_carlo"; }

double EntropyProfile::mean() const {
  return h.empty() ? 0.0 : std::accumulate(h.begin(), h.end(), 0.0) / static_cast<double>(h.size());
}

namespace {

EntropyProfile exact_profile(const BitLaw& law, std::size_t K) {
  const auto m = static_cast<std::size_t>(law.cols());
  if (K > 8 || m > 4) throw std::invalid_argument("exact profile requires K <= 8 and side alphabet <= 4");
  const std::size_t nx = std::size_t{1} << K;
  // a-index of each x-index (bit 0 of the sequence is the most significant)
  std::vector<std::size_t> to_a(nx);
  for (std::size_t xi = 0; xi < nx; ++xi) {
    BitVector x(K);
    for (std::size_t i = 0; i < K; ++i) x[i] = (xi >> (K - 1 - i)) & 1u;
    transform_inplace(x);
    std::size_t ai = 0;
    for (std::size_t i = 0; i < K; ++i) ai = (ai << 1) | x[i];
    to_a[xi] = ai;
  }
  std::size_t no = 1;
  for (std::size_t i = 0; i < K; ++i) no *= m;
  std::vector<double> H(K + 1, 0.0);
  std::vector<double> pa(nx), work(nx);
  std::vector<std::size_t> o(K);
  for (std::size_t oi = 0; oi < no; ++oi) {
    for (std::size_t i = 0, r = oi; i < K; ++i, r /= m) o[i] = r % m;
    for (std::size_t xi = 0; xi < nx; ++xi) {
      double p = 1.0;
      for (std::size_t i = 0; i < K && p > 0.0; ++i)
        p *= law(static_cast<Eigen::Index>((xi >> (K - 1 - i)) & 1u), static_cast<Eigen::Index>(o[i]));
      pa[to_a[xi]] = p;
    }
    work = pa;
    std::size_t len = nx;
    for (std::size_t i = K + 1; i-- > 0;) {
      for (std::size_t k = 0; k < len; ++k) H[i] += neg_xlog2x(work[k]);
      if (i == 0) break;
      len /= 2;
      for (std::size_t k = 0; k < len; ++k) work[k] = work[2 * k] + work[2 * k + 1];
    }
  }
  EntropyProfile prof;
  prof.mode = ProfileMode::exact;
  prof.h.resize(K);
  for (std::size_t i = 0; i < K; ++i) prof.h[i] = std::clamp(H[i + 1] - H[i], 0.0, 1.0);
  return prof;
}

struct ChunkResult {
  std::vector<double> sum;
  std::size_t accepted = 0;
  std::size_t discarded = 0;
};

ChunkResult profile_chunk(const BitLaw& law, std::size_t K, std::size_t count, std::uint64_t seed) {
  const auto m = static_cast<std::size_t>(law.cols());
  std::vector<double> flat(2 * m);
  for (std::size_t o = 0; o < m; ++o) {
    flat[o] = law(0, static_cast<Eigen::Index>(o));
    flat[m + o] = law(1, static_cast<Eigen::Index>(o));
  }
  const auto llr_table = law_llr(law);
  RngSource rng(seed);
  ScKernel<double> kernel(K);
  ChunkResult res{std::vector<double>(K, 0.0), 0, 0};
  BitVector x(K);
  std::vector<double> llr(K), cost(K);
  for (std::size_t s = 0; s < count; ++s) {
    for (std::size_t i = 0; i < K; ++i) {
      const std::size_t c = rng.categorical(flat);
      x[i] = c >= m;
      llr[i] = llr_table[c % m];
    }
    BitVector a = transform(x);
    bool finite = true;
    bool ok = kernel.run(llr, [&](std::size_t j, double l) {
      const double c = neg_log2_prob(l, a[j]);
      if (!std::isfinite(c)) finite = false;
      cost[j] = c;
      return a[j];
    });
    if (!ok || !finite) {
      ++res.discarded;
      continue;
    }
    ++res.accepted;
    for (std::size_t j = 0; j < K; ++j) res.sum[j] += cost[j];
  }
  return res;
}

EntropyProfile monte_carlo_profile(const BitLaw& law, std::size_t K, const ProfileOptions& opt) {
  if (opt.samples < 1000) throw std::invalid_argument("Monte Carlo profile needs at least 1000 samples");
  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (opt.samples + kChunk - 1) / kChunk;
  std::vector<ChunkResult> results(chunks);
  auto work = [&](std::size_t c) {
    const std::size_t count = std::min(kChunk, opt.samples - c * kChunk);
    results[c] = profile_chunk(law, K, count, derive_seed(opt.seed, c));
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(chunks)));
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) work(c);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t c = t; c < chunks; c += threads) work(c);
      });
    for (auto& th : pool) th.join();
  }
  EntropyProfile prof;
  prof.mode = ProfileMode::monte_carlo;
  prof.samples = opt.samples;
  prof.seed = opt.seed;
  prof.h.assign(K, 0.0);
  std::size_t accepted = 0;
  for (const auto& r : results) {
    accepted += r.accepted;
    prof.discarded += r.discarded;
    for (std::size_t j = 0; j < K; ++j) prof.h[j] += r.sum[j];
  }
  if (static_cast<double>(prof.discarded) > 0.01 * static_cast<double>(opt.samples))
    throw std::runtime_error("Monte Carlo profile discarded " + std::to_string(prof.discarded) +
                             " zero-probability samples (more than 1%)");
  for (auto& v : prof.h) v = std::clamp(v / static_cast<double>(accepted), 0.0, 1.0);
  return prof;
}

}  // namespace

EntropyProfile entropy_profile(const BitLaw& law, std::size_t K, const ProfileOptions& opt) {
  if (!is_power_of_two(K)) throw std::invalid_argument("block length must be a power of two");
  if (std::abs(law.sum() - 1.0) > 1e-12 || (law.array() < 0.0).any())
    throw std::invalid_argument("bit/observation law is not a probability table");
  if (!opt.store) return opt.mode == ProfileMode::exact ? exact_profile(law, K) : monte_carlo_profile(law, K, opt);
  const std::string key = profile_key(law, K, opt);
  if (auto hit = opt.store->load(key)) return *hit;
  EntropyProfile p = opt.mode == ProfileMode::exact ? exact_profile(law, K) : monte_carlo_profile(law, K, opt);
  opt.store->save(key, p);
  return p;
}

std::string profile_key(const BitLaw& law, std::size_t K, const ProfileOptions& opt) {
  char buf[64];
  std::string key = "K=" + std::to_string(K) + ";mode=" + to_string(opt.mode);
  if (opt.mode == ProfileMode::monte_carlo)
    key += ";samples=" + std::to_string(opt.samples) + ";seed=" + std::to_string(opt.seed);
  key += ";law=";
  for (Eigen::Index r = 0; r < law.rows(); ++r)
    for (Eigen::Index c = 0; c < law.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g,", law(r, c));
      key += buf;
    }
  key += ";cols=" + std::to_string(law.cols());
  return key;
}

EntropyProfile entropy_profile(const SourceSpec& source, const Dmc* side_channel, Role role,
                               const PolarParams& params, const ProfileOptions& opt) {
  return entropy_profile(role_law(role, source, side_channel), params.K, opt);
}

IndexSet threshold_set(const EntropyProfile& p, double threshold) {
  IndexSet s;
  for (std::size_t i = 0; i < p.h.size(); ++i)
    if (p.h[i] > threshold) s.push_back(i);
  return s;
}

void IndexSets::check() const {
  if (!is_subset(V_UY, V_U)) throw std::logic_error("index sets: V_{U|Y} not contained in V_U");
  if (!is_subset(V_U, H_U)) throw std::logic_error("index sets: V_U not contained in H_U");
  if (!is_subset(V_XU, V_X)) throw std::logic_error("index sets: V_{X|U} not contained in V_X");
  if (!is_subset(V_UY, H_UY)) throw std::logic_error("index sets: V_{U|Y} not contained in H_{U|Y}");
}

IndexSets build_index_sets(const std::map<Role, EntropyProfile>& profiles, const PolarParams& params) {
  auto get = [&](Role r) -> const EntropyProfile& {
    auto it = profiles.find(r);
    if (it == profiles.end()) throw std::invalid_argument("missing entropy profile for role " + to_string(r));
    if (it->second.K() != params.K) throw std::invalid_argument("profile length does not match K");
    return it->second;
  };
  const double d = params.delta();
  IndexSets s;
  s.K = params.K;
  s.H_U = threshold_set(get(Role::U), d);
  s.V_U = threshold_set(get(Role::U), 1.0 - d);
  s.H_UY = threshold_set(get(Role::U_given_Y), d);
  s.V_UY = threshold_set(get(Role::U_given_Y), 1.0 - d);
  s.V_X = threshold_set(get(Role::X), 1.0 - d);
  s.V_XU = threshold_set(get(Role::X_given_U), 1.0 - d);

  auto vuy = set_intersection(s.V_UY, s.V_U);
  auto vxu = set_intersection(s.V_XU, s.V_X);
  s.repairs = (s.V_UY.size() - vuy.size()) + (s.V_XU.size() - vxu.size());
  s.V_UY = std::move(vuy);
  s.V_XU = std::move(vxu);
  s.H_UY = set_union(s.H_UY, s.V_UY);
  s.check();
  if (s.H_UY.size() > s.H_U.size())
    throw std::logic_error("index sets: side information increased the high-entropy set");
  return s;
}

// ---------------------------------------------------------------------------

double sc_posterior(std::span<const Bit> prefix, std::span<const std::uint32_t> obs, std::size_t j,
                    const BitLaw& law) {
  const std::size_t K = obs.size();
  if (j >= K || prefix.size() < j) throw std::out_of_range("sc_posterior index out of range");
  const auto llr = observation_llr(law, obs);
  ScKernel<double> kernel(K);
  double p0 = 0.5;
  bool ok = kernel.run(llr, [&](std::size_t i, double l) -> Bit {
    if (i < j) return prefix[i];
    if (i == j) p0 = prob_zero(l);
    return 0;
  });
  // consistency of positions after j is irrelevant; recheck the prefix alone
  if (!ok) {
    bool prefix_ok = true;
    kernel.run(llr, [&](std::size_t i, double l) -> Bit {
      if (i < j) {
        const Bit b = prefix[i];
        if (std::isnan(l) || (b && l == std::numeric_limits<double>::infinity()) ||
            (!b && l == -std::numeric_limits<double>::infinity()))
          prefix_ok = false;
        return b;
      }
      return l >= 0 ? 0 : 1;
    });
    if (!prefix_ok) throw std::domain_error("conditioning prefix has probability zero");
  }
  return p0;
}

BitVector sc_decode_si(std::span<const std::uint32_t> obs, const KnownBits& known, const IndexSet& required,
                       const BitLaw& law) {
  const std::size_t K = obs.size();
  if (known.positions.size() != known.values.size()) throw std::invalid_argument("known bits misaligned");
  if (!is_subset(required, known.positions)) throw std::invalid_argument("known bits do not cover the required set");
  std::vector<int> slot(K, -1);
  for (std::size_t k = 0; k < known.positions.size(); ++k) slot.at(known.positions[k]) = static_cast<int>(k);
  const auto llr = observation_llr(law, obs);
  ScKernel<double> kernel(K);
  BitVector a(K);
  kernel.run(llr, [&](std::size_t j, double l) -> Bit {
    const Bit b = slot[j] >= 0 ? known.values[static_cast<std::size_t>(slot[j])] : (l >= 0 || std::isnan(l) ? 0 : 1);
    a[j] = b;
    return b;
  });
  return a;
}

std::string to_string(SampleMode m) { return m == SampleMode::random ? "random" : "argmax"; }

BitVector sc_sample(const KnownBits& frozen, std::span<const std::uint32_t> obs, const BitLaw& law, SampleMode mode,
                    const IndexSet& argmax_positions, RandomSource& rng) {
  const std::size_t K = obs.size();
  if (frozen.positions.size() != frozen.values.size()) throw std::invalid_argument("frozen assignment incomplete");
  std::vector<int> slot(K, -1);
  for (std::size_t k = 0; k < frozen.positions.size(); ++k) slot.at(frozen.positions[k]) = static_cast<int>(k);
  std::vector<bool> use_argmax(K, false);
  if (mode == SampleMode::argmax)
    for (auto i : argmax_positions) use_argmax.at(i) = true;
  const auto llr = observation_llr(law, obs);
  ScKernel<double> kernel(K);
  BitVector a(K);
  kernel.run(llr, [&](std::size_t j, double l) -> Bit {
    Bit b;
    if (slot[j] >= 0)
      b = frozen.values[static_cast<std::size_t>(slot[j])];
    else if (use_argmax[j])
      b = (l >= 0 || std::isnan(l)) ? 0 : 1;
    else
      b = rng.bernoulli(prob_zero(l));
    a[j] = b;
    return b;
  });
  return a;
}

// ---------------------------------------------------------------------------

PolarChannelCode PolarChannelCode::build(const Dmc& channel, const EntropyProfile& profile, double rate) {
  const std::size_t K = profile.K();
  if (!is_power_of_two(K)) throw std::invalid_argument("channel code length must be a power of two");
  if (!(rate > 0.0 && rate <= 1.0)) throw std::invalid_argument("channel code rate must lie in (0,1]");
  PolarChannelCode c;
  c.K_ = K;
  c.capacity_ = 1.0 - profile.mean();
  if (rate > c.capacity_ + 1e-12)
    throw std::invalid_argument("channel code rate " + std::to_string(rate) + " exceeds estimated capacity " +
                                std::to_string(c.capacity_));
  const auto k = static_cast<std::size_t>(std::floor(rate * static_cast<double>(K) + 1e-9));
  if (k == 0) throw std::invalid_argument("channel code carries no information bits");
  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return profile.h[a] < profile.h[b]; });
  c.info_.assign(order.begin(), order.begin() + static_cast<long>(k));
  std::sort(c.info_.begin(), c.info_.end());
  std::vector<std::size_t> all(K);
  std::iota(all.begin(), all.end(), 0);
  c.frozen_ = set_difference(all, c.info_);
  c.law_ = role_law(Role::X_given_Y, SourceSpec::uniform_identity(), &channel);
  return c;
}

PolarChannelCode PolarChannelCode::design(const Dmc& channel, std::size_t K, double rate, std::size_t samples,
                                          std::uint64_t seed, unsigned threads) {
  const BitLaw law = role_law(Role::X_given_Y, SourceSpec::uniform_identity(), &channel);
  ProfileOptions opt;
  if (K <= 8 && channel.outputs() <= 4) {
    opt.mode = ProfileMode::exact;
  } else {
    opt.mode = ProfileMode::monte_carlo;
    opt.samples = samples;
    opt.seed = seed;
    opt.threads = threads;
  }
  return build(channel, entropy_profile(law, K, opt), rate);
}

BitVector PolarChannelCode::encode(std::span<const Bit> message) const {
  if (message.size() != info_.size()) throw std::invalid_argument("channel code message length mismatch");
  BitVector a(K_, 0);
  scatter(a, info_, message);
  transform_inplace(a);
  return a;
}

BitVector PolarChannelCode::decode(std::span<const std::uint32_t> y) const {
  if (y.size() != K_) throw std::invalid_argument("received word length mismatch");
  KnownBits known{frozen_, BitVector(frozen_.size(), 0)};
  auto a = sc_decode_si(y, known, frozen_, law_);
  return gather(a, info_);
}

std::size_t PolarChannelCode::codewords_for(std::size_t payload_length) const {
  return (payload_length + info_.size() - 1) / info_.size();
}

std::vector<BitVector> PolarChannelCode::encode_stream(std::span<const Bit> payload) const {
  std::vector<BitVector> out;
  const std::size_t k = info_.size();
  for (std::size_t off = 0; off < payload.size(); off += k) {
    BitVector m(k, 0);
    std::copy(payload.begin() + static_cast<long>(off),
              payload.begin() + static_cast<long>(std::min(payload.size(), off + k)), m.begin());
    out.push_back(encode(m));
  }
  return out;
}

BitVector PolarChannelCode::decode_stream(const std::vector<Symbols>& received, std::size_t payload_length) const {
  if (received.size() != codewords_for(payload_length)) throw std::invalid_argument("codeword count mismatch");
  BitVector out;
  for (const auto& y : received) append(out, decode(y));
  out.resize(payload_length);
  return out;
}

}  // namespace wiretap
