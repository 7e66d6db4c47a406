#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wiretap/bits.hpp"
#include "wiretap/channel.hpp"
#include "wiretap/random.hpp"

namespace wiretap {

struct PolarParams {
  std::size_t K = 0;
  double beta = 0.0;

  static PolarParams make(std::size_t K, double beta);
  // 2^{-K^beta}
  double delta() const { return std::exp2(-std::pow(static_cast<double>(K), beta)); }
};

// Joint law q(u, x) of the auxiliary and channel-input bits.
struct SourceSpec {
  Eigen::Matrix2d q = Eigen::Matrix2d::Constant(0.25);

  static SourceSpec uniform_identity();                   // U = X uniform
  static SourceSpec from_joint(const Eigen::Matrix2d& q);
  // q(u) = Ber(pu) on u=1, x = u passed through a BSC(flip).
  static SourceSpec from_conditional(double pu, double flip);
  Eigen::Vector2d qu() const { return q.rowwise().sum(); }
  Eigen::Vector2d qx() const { return q.colwise().sum().transpose(); }
  void validate() const;
};

// Joint law of one polarized-domain bit and its per-coordinate observation:
// rows are the bit value, columns the observation symbol.
using BitLaw = Eigen::Matrix<double, 2, Eigen::Dynamic>;

enum class Role { U, U_given_Y, X, X_given_U, X_given_Y };
std::string to_string(Role r);
Role parse_role(const std::string& name);

// U: q_U. U_given_Y: sum_x q(u,x) W(y|x). X: q_X. X_given_U: q(u,x) with u observed.
// X_given_Y: uniform input through the channel (channel coding).
BitLaw role_law(Role role, const SourceSpec& source, const Dmc* channel);

// ---------------------------------------------------------------------------
// Polar transform x = a G_K, G_K = [1 0; 1 1]^{(x) log K}, no bit reversal.

void transform_inplace(std::span<Bit> bits);
BitVector transform(std::span<const Bit> bits);
// Packed form (bit i in word i/64); K must be a power of two.
void transform_packed(std::span<std::uint64_t> words, std::size_t K);

// ---------------------------------------------------------------------------
// LLR-domain successive cancellation kernel. LLR = log(P(bit=0)/P(bit=1)).

template <typename Scalar>
[[gnu::noinline]] Scalar box_plus_tail(Scalar sm, Scalar a, Scalar b) {
  using std::abs;
  using std::exp;
  using std::log1p;
  return sm + log1p(exp(-abs(a + b))) - log1p(exp(-abs(a - b)));
}

// Cheap cases inline, the transcendental part out of line.
template <typename Scalar>
inline Scalar box_plus(Scalar a, Scalar b) {
  using std::abs;
  using std::isinf;
  using std::min;
  if (a == Scalar(0) || b == Scalar(0)) return Scalar(0);
  const Scalar s = ((a < 0) != (b < 0)) ? Scalar(-1) : Scalar(1);
  const Scalar m = min(abs(a), abs(b));
  if (isinf(a) || isinf(b)) return s * m;
  return box_plus_tail(s * m, a, b);
}

template <typename Scalar>
Scalar prob_zero(Scalar llr) {
  using std::exp;
  using std::isnan;
  if (isnan(llr)) return Scalar(0.5);
  if (llr >= 0) return Scalar(1) / (Scalar(1) + exp(-llr));
  const Scalar e = exp(llr);
  return e / (Scalar(1) + e);
}

// -log2 P(bit) for the given LLR, computed without cancellation.
template <typename Scalar>
Scalar neg_log2_prob(Scalar llr, Bit bit) {
  using std::exp;
  using std::log1p;
  const Scalar x = bit ? llr : -llr;  // -log P(bit) = softplus(x)
  if (x == std::numeric_limits<Scalar>::infinity()) return std::numeric_limits<Scalar>::infinity();
  if (x == -std::numeric_limits<Scalar>::infinity()) return Scalar(0);
  if (x == Scalar(0)) return Scalar(1);
  const Scalar sp = x > 0 ? x + log1p(exp(-x)) : log1p(exp(x));
  return sp / Scalar(M_LN2);
}

template <typename Scalar = double>
class ScKernel {
 public:
  explicit ScKernel(std::size_t K) : K_(K), m_(log2_exact(K)) {
    llr_.resize(m_ + 1);
    x_.resize(m_ + 1);
    for (unsigned d = 0; d <= m_; ++d) {
      llr_[d].assign(K >> d, Scalar(0));
      x_[d].assign(K >> d, 0);
    }
  }

  std::size_t size() const { return K_; }

  // decide(j, llr) returns the bit for position j. Returns false when some
  // decision had zero probability under the recursion (or the LLR was NaN).
  template <class Decide>
  bool run(std::span<const Scalar> channel_llr, Decide&& decide) {
    std::copy(channel_llr.begin(), channel_llr.end(), llr_[0].begin());
    consistent_ = true;
    std::size_t j = 0;
    node(0, j, decide);
    return consistent_;
  }

  // Observed-domain bits of the last run (equals transform of the decisions).
  const BitVector& codeword() const { return x_[0]; }

 private:
  template <class Decide>
  Bit leaf(Scalar l, std::size_t& j, Decide& decide) {
    const Bit b = decide(j, l);
    using std::isnan;
    if (isnan(l) || (b == 1 && l == std::numeric_limits<Scalar>::infinity()) ||
        (b == 0 && l == -std::numeric_limits<Scalar>::infinity()))
      consistent_ = false;
    ++j;
    return b;
  }

  template <class Decide>
  void node(unsigned d, std::size_t& j, Decide& decide) {
    const std::size_t n = K_ >> d;
    const Scalar* lp = llr_[d].data();
    Bit* xp = x_[d].data();
    if (n == 1) {
      xp[0] = leaf(lp[0], j, decide);
      return;
    }
    if (n == 2) {  // both leaves inline
      const Bit b0 = leaf(box_plus(lp[0], lp[1]), j, decide);
      const Bit b1 = leaf(b0 ? lp[1] - lp[0] : lp[1] + lp[0], j, decide);
      xp[0] = b0 ^ b1;
      xp[1] = b1;
      return;
    }
    const std::size_t h = n / 2;
    Scalar* __restrict lc = llr_[d + 1].data();
    const Bit* __restrict xc = x_[d + 1].data();
    Bit* __restrict xo = xp;
    const Scalar* __restrict lo = lp;
    for (std::size_t i = 0; i < h; ++i) lc[i] = box_plus(lo[i], lo[i + h]);
    node(d + 1, j, decide);
    std::copy(xc, xc + h, xo);
    // a - b and a + (-b) are the same IEEE operation
    for (std::size_t i = 0; i < h; ++i) lc[i] = lo[i + h] + (xo[i] ? -lo[i] : lo[i]);
    node(d + 1, j, decide);
    for (std::size_t i = 0; i < h; ++i) xo[i] ^= xc[i];
    std::copy(xc, xc + h, xo + h);
  }

  std::size_t K_;
  unsigned m_;
  std::vector<std::vector<Scalar>> llr_;
  std::vector<BitVector> x_;
  bool consistent_ = true;
};

// Per-symbol LLR table of a law and the per-coordinate LLRs of an observation.
std::vector<double> law_llr(const BitLaw& law);
std::vector<double> observation_llr(const BitLaw& law, std::span<const std::uint32_t> obs);

// ---------------------------------------------------------------------------

enum class ProfileMode { exact, monte_carlo };
std::string to_string(ProfileMode m);

struct EntropyProfile {
  std::vector<double> h;  // h[i] estimates H(A^i | A^{1:i-1}, O^{1:K})
  ProfileMode mode = ProfileMode::exact;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t discarded = 0;

  std::size_t K() const { return h.size(); }
  double mean() const;
};

class ProfileStore;

struct ProfileOptions {
  ProfileMode mode = ProfileMode::exact;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  const ProfileStore* store = nullptr;  // optional persistent cache
};

// Everything a profile depends on, as text. Thread count is excluded since
// results do not depend on it.
std::string profile_key(const BitLaw& law, std::size_t K, const ProfileOptions& opt);

class ProfileStore {
 public:
  virtual ~ProfileStore() = default;
  virtual std::optional<EntropyProfile> load(const std::string& key) const = 0;
  virtual void save(const std::string& key, const EntropyProfile& profile) const = 0;
};

EntropyProfile entropy_profile(const BitLaw& law, std::size_t K, const ProfileOptions& opt);
EntropyProfile entropy_profile(const SourceSpec& source, const Dmc* side_channel, Role role,
                               const PolarParams& params, const ProfileOptions& opt);

struct IndexSets {
  std::size_t K = 0;
  IndexSet V_U, H_U, V_UY, H_UY, V_X, V_XU;
  std::size_t repairs = 0;

  void check() const;
};

IndexSets build_index_sets(const std::map<Role, EntropyProfile>& profiles, const PolarParams& params);
// {i : h_i > threshold}
IndexSet threshold_set(const EntropyProfile& p, double threshold);

// ---------------------------------------------------------------------------

// P(A^j = 0 | a^{1:j-1}, obs) for 0-based j. Throws if the prefix has zero probability.
double sc_posterior(std::span<const Bit> prefix, std::span<const std::uint32_t> obs, std::size_t j,
                    const BitLaw& law);

struct KnownBits {
  IndexSet positions;
  BitVector values;  // aligned with positions
};

// Known positions copied, others decided by argmax (ties -> 0). `required`
// must be covered by the known positions.
BitVector sc_decode_si(std::span<const std::uint32_t> obs, const KnownBits& known, const IndexSet& required,
                       const BitLaw& law);

enum class SampleMode { random, argmax };
std::string to_string(SampleMode m);

// Frozen positions copied; positions in `argmax_positions` use argmax when
// mode == argmax; every other position is drawn from the SC posterior.
BitVector sc_sample(const KnownBits& frozen, std::span<const std::uint32_t> obs, const BitLaw& law, SampleMode mode,
                    const IndexSet& argmax_positions, RandomSource& rng);

// ---------------------------------------------------------------------------
// Frozen-bit polar channel code over a binary-input DMC with uniform input.

class PolarChannelCode {
 public:
  PolarChannelCode() = default;
  // Information set = the k lowest-entropy indices of the profile.
  static PolarChannelCode build(const Dmc& channel, const EntropyProfile& profile, double rate);
  static PolarChannelCode design(const Dmc& channel, std::size_t K, double rate, std::size_t samples,
                                 std::uint64_t seed, unsigned threads = 1);

  std::size_t block_length() const { return K_; }
  std::size_t info_length() const { return info_.size(); }
  const IndexSet& info_set() const { return info_; }
  double capacity_estimate() const { return capacity_; }

  BitVector encode(std::span<const Bit> message) const;
  BitVector decode(std::span<const std::uint32_t> y) const;

  // Splits an arbitrary payload into zero-padded codewords.
  std::vector<BitVector> encode_stream(std::span<const Bit> payload) const;
  BitVector decode_stream(const std::vector<Symbols>& received, std::size_t payload_length) const;
  std::size_t codewords_for(std::size_t payload_length) const;

 private:
  std::size_t K_ = 0;
  IndexSet info_, frozen_;
  double capacity_ = 0.0;
  BitLaw law_;
};

}  // namespace wiretap
