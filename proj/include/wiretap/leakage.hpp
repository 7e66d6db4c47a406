#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wiretap/codec.hpp"

namespace wiretap {

// Exact joint law of named variables. Each outcome holds one symbol string
// per role, in the order of `roles`.
struct JointTable {
  std::vector<std::string> roles;
  std::map<std::vector<Symbols>, double> p;

  double mass() const;
  // mass 1 within 1e-10, no negative entries, consistent arity
  void validate() const;
  std::size_t index(const std::string& role) const;
  JointTable marginal(const std::vector<std::string>& keep) const;
  void add(std::vector<Symbols> outcome, double prob);
};

// Per-block role names: M, Mp (M'), R, Rp (R'), T, A, U, V, X, Y, Z, XA (tapped
// values), E, Ep (E'), S (eavesdropper states). Block b is addressed as "Z_1".
std::string block_role(const std::string& name, std::size_t block);

// init_transmission skips the hash seeds, which only matter for the key.
enum class EncoderKind { session, init, init_transmission };

struct EnumerateRequest {
  std::vector<std::string> roles;
  std::size_t blocks = 1;  // session blocks; chained through M'
  EncoderKind kind = EncoderKind::session;
  std::uint64_t cap = std::uint64_t{1} << 24;  // execution paths
};

// Enumerates every message, randomizer, hash seed, sampler coin and channel
// outcome of the real encoder. Throws std::length_error past the cap.
JointTable enumerate_induced(const WiretapCode& code, const ChannelFamily& family, const Exposure& exposure,
                             const EnumerateRequest& request);

// ---------------------------------------------------------------------------
// Information measures in bits. Role lists select groups of variables.

double entropy(const JointTable& t, const std::vector<std::string>& a);
double conditional_entropy(const JointTable& t, const std::vector<std::string>& a, const std::vector<std::string>& b);
double mutual_information(const JointTable& t, const std::vector<std::string>& a, const std::vector<std::string>& b);
// -log2 max p(a)
double min_entropy(const JointTable& t, const std::vector<std::string>& a);
// -log2 max_{a,b} p(a,b)/p(b)
double conditional_min_entropy(const JointTable& t, const std::vector<std::string>& a,
                               const std::vector<std::string>& b);
// Both tables over the same roles. KL is +inf when q = 0 < p somewhere.
double kl_divergence(const JointTable& p, const JointTable& q);
double variational_distance(const JointTable& p, const JointTable& q);  // sum |p - q|
// p_a * p_b over the roles a then b.
JointTable product_of_marginals(const JointTable& t, const std::vector<std::string>& a,
                                const std::vector<std::string>& b);

struct InfoMeasures {
  double mutual_information = 0, kl = 0, variational = 0, min_entropy = 0, conditional_entropy = 0;
};
// KL and V between p and q; the others on p with a against b.
InfoMeasures info_measures(const JointTable& p, const JointTable& q, const std::vector<std::string>& a,
                           const std::vector<std::string>& b);

// ---------------------------------------------------------------------------

struct CheckReport {
  std::string quantity;
  double exact_value = 0;
  double bound = 0;
  std::string bound_ref;
  bool pass = false;
  std::map<std::string, double> extra;
};

// D(q^{(x)N}_{UX} || induced law of (U,X)) for init-type blocks against 2LK delta_K.
// The channel factors are common to both laws, so (U,X) suffices.
CheckReport check_sampler_divergence(const WiretapCode& code, const ChannelFamily& family,
                                     std::uint64_t cap = std::uint64_t{1} << 24);

// One session block: V(p(Mbar,R,Z,X[A]), p(Mbar) p(R,Z,X[A])) against the plain
// leftover bound sqrt(2^{r - H_min(T | Z, X[A])}), Mbar = M || M'.
// extra["mutual_information"] and extra["f_bound"] hold I(M; Z, X[A], R) and
// 1.2 (V N - V log2 V).
CheckReport check_leftover_hash(const WiretapCode& code, const ChannelFamily& family, const Exposure& exposure,
                                std::uint64_t cap = std::uint64_t{1} << 24);

// i.i.d. pair law p(x,z) (rows x): greedy trimming lower bound on the smooth
// min-entropy of X^n given Z^n at eps = 2^{-n d^2 / (2 log2^2(|X|+3))},
// against n H(X|Z) - n d. Exact by grouping outcomes into joint types.
CheckReport check_smoothed_min_entropy(const Eigen::MatrixXd& pxz, std::size_t n, double d);
// Largest trimmed min-entropy with at most eps mass removed.
double trimmed_min_entropy(const Eigen::MatrixXd& pxz, std::size_t n, double eps);

struct JointLeakage {
  std::vector<double> per_block;  // I(M_b M'_b; Z_b, X_b[A], R_b)
  double joint = 0;               // I(M_{1:B}; Z_{1:B}, X_{1:B}[A], R_{1:B})
  double messages_dependence = 0; // I(M_1; M_2 ...) of the enumerated law
  // the bound 2B delta4 for gamma in {0.25, 0.5, 0.9}
  std::map<double, double> delta4_bound;
  CheckReport report;  // joint <= 2 sum(per_block)
};
JointLeakage joint_block_leakage(const WiretapCode& code, const ChannelFamily& family, const Exposure& exposure,
                                 std::uint64_t cap = std::uint64_t{1} << 24);

// (2^{1-L^g} + sqrt(2^{-N xi})) log2(2^N / (2^{1-L^g} + sqrt(2^{-N xi})))
double delta4(std::size_t K, std::size_t L, double xi, double gamma);

// Per-use alternating eavesdropper states against the declared best channel
// alone: I(M; Z, X[A], R) mixed <= same quantity at constant best state + 1e-9.
// The best channel is eves[best]; its degradation certificate must exist.
CheckReport check_best_eve_bound(const WiretapCode& code, const ChannelFamily& family, std::uint32_t best,
                                 std::uint64_t cap = std::uint64_t{1} << 24);

}  // namespace wiretap
