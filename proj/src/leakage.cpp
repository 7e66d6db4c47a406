#include "wiretap/leakage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wiretap/info.hpp"

namespace wiretap {

double JointTable::mass() const {
  double m = 0;
  for (const auto& [o, v] : p) m += v;
  return m;
}

void JointTable::validate() const {
  for (const auto& [o, v] : p) {
    if (o.size() != roles.size()) throw std::logic_error("joint table: outcome arity differs from role count");
    if (v < 0) throw std::logic_error("joint table: negative probability");
  }
  if (std::abs(mass() - 1.0) > 1e-10) throw std::logic_error("joint table: mass " + std::to_string(mass()) + " != 1");
}

std::size_t JointTable::index(const std::string& role) const {
  auto it = std::find(roles.begin(), roles.end(), role);
  if (it == roles.end()) throw std::invalid_argument("joint table has no role " + role);
  return static_cast<std::size_t>(it - roles.begin());
}

JointTable JointTable::marginal(const std::vector<std::string>& keep) const {
  std::vector<std::size_t> idx;
  for (const auto& k : keep) idx.push_back(index(k));
  JointTable out;
  out.roles = keep;
  for (const auto& [o, v] : p) {
    std::vector<Symbols> key;
    key.reserve(idx.size());
    for (auto i : idx) key.push_back(o[i]);
    out.p[std::move(key)] += v;
  }
  return out;
}

void JointTable::add(std::vector<Symbols> outcome, double prob) {
  if (outcome.size() != roles.size()) throw std::invalid_argument("joint table: outcome arity differs from role count");
  if (prob > 0) p[std::move(outcome)] += prob;
}

std::string block_role(const std::string& name, std::size_t block) { return name + "_" + std::to_string(block); }

namespace {

Symbols symbols(std::span<const Bit> bits) { return Symbols(bits.begin(), bits.end()); }

Symbols role_value(const std::string& name, const BlockRecord& rec, std::span<const Bit> m,
                   std::span<const Bit> m_prime) {
  if (name == "M") return symbols(m);
  if (name == "Mp") return symbols(m_prime);
  if (name == "R") return symbols(rec.r);
  if (name == "Rp") return symbols(rec.r_prime);
  if (name == "T") return symbols(rec.t);
  if (name == "A") return symbols(rec.a);
  if (name == "U") return symbols(rec.u);
  if (name == "V") return symbols(rec.v);
  if (name == "X") return symbols(rec.x);
  if (name == "Y") return rec.y;
  if (name == "Z") return rec.z;
  if (name == "S") return rec.eve_states;
  if (name == "E") return symbols(rec.e);
  if (name == "Ep") return symbols(rec.e_prime);
  if (name == "XA") {
    // positions then values: the eavesdropper knows where it looked
    Symbols s(rec.tap.begin(), rec.tap.end());
    s.insert(s.end(), rec.tap_values.begin(), rec.tap_values.end());
    return s;
  }
  throw std::invalid_argument("unknown role " + name);
}

std::pair<std::string, std::size_t> split_role(const std::string& role) {
  const auto pos = role.rfind('_');
  if (pos == std::string::npos || pos + 1 == role.size())
    throw std::invalid_argument("role " + role + " lacks a block suffix such as _1");
  const std::size_t b = std::stoul(role.substr(pos + 1));
  if (b == 0) throw std::invalid_argument("blocks are numbered from 1");
  return {role.substr(0, pos), b};
}

std::vector<std::string> concat_roles(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// sum_{a,b} |p(a,b) - p(a) p(b)| without building the product table
double independence_distance(const JointTable& t, const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
  const JointTable ab = t.marginal(concat_roles(a, b));
  const JointTable pa = t.marginal(a), pb = t.marginal(b);
  double v = 1.0;  // mass of the product, corrected below on the joint support
  for (const auto& [o, p] : ab.p) {
    std::vector<Symbols> ka(o.begin(), o.begin() + static_cast<long>(a.size()));
    std::vector<Symbols> kb(o.begin() + static_cast<long>(a.size()), o.end());
    const double q = pa.p.at(ka) * pb.p.at(kb);
    v += std::abs(p - q) - q;
  }
  return std::max(v, 0.0);
}

std::string with_block(const std::string& name, std::size_t b) { return block_role(name, b); }

}  // namespace

JointTable enumerate_induced(const WiretapCode& code, const ChannelFamily& family, const Exposure& exposure,
                             const EnumerateRequest& req) {
  const auto& c = code.config;
  if (req.blocks == 0) throw std::invalid_argument("enumerate at least one block");
  if (req.kind != EncoderKind::session && req.blocks != 1) throw std::invalid_argument("init enumeration covers one block");
  std::vector<std::pair<std::string, std::size_t>> parsed;
  bool wants_y = false;
  for (const auto& r : req.roles) {
    parsed.push_back(split_role(r));
    if (parsed.back().second > req.blocks) throw std::invalid_argument("role " + r + " is beyond the enumerated blocks");
    wants_y |= parsed.back().first == "Y";
  }
  // Main-channel noise is summed out anyway when Y is not requested.
  ChannelFamily fam = family;
  if (!wants_y)
    for (auto& m : fam.mains) m = Dmc::noiseless();

  JointTable table;
  table.roles = req.roles;
  ChoiceExplorer ex;
  std::uint64_t paths = 0;
  std::vector<BlockRecord> recs(req.blocks);
  std::vector<BitVector> ms(req.blocks), mps(req.blocks);
  while (ex.next_path()) {
    if (++paths > req.cap)
      throw std::length_error("enumeration exceeds " + std::to_string(req.cap) + " execution paths (N = " +
                              std::to_string(c.N()) + ", " + std::to_string(req.blocks) + " block(s)); use Monte Carlo");
    BitVector m_prime;
    for (std::size_t b = 0; b < req.blocks; ++b) {
      if (req.kind != EncoderKind::session) {
        recs[b] = req.kind == EncoderKind::init ? init_block(code, fam, exposure, {ex, ex})
                                                : init_transmission(code, fam, exposure, {ex, ex});
        ms[b].clear();
        mps[b].clear();
      } else {
        ms[b] = ex.uniform_bits(c.message_length(b));
        mps[b] = m_prime;
        recs[b] = encode_block(code, ms[b], m_prime, fam, exposure, {ex, ex});
        m_prime = recs[b].e;
      }
    }
    std::vector<Symbols> outcome;
    outcome.reserve(parsed.size());
    for (const auto& [name, b] : parsed) outcome.push_back(role_value(name, recs[b - 1], ms[b - 1], mps[b - 1]));
    table.add(std::move(outcome), ex.path_probability());
  }
  table.validate();
  return table;
}

// ---------------------------------------------------------------------------

double entropy(const JointTable& t, const std::vector<std::string>& a) {
  double h = 0;
  for (const auto& [o, p] : t.marginal(a).p) h += neg_xlog2x(p);
  return h;
}

double conditional_entropy(const JointTable& t, const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return entropy(t, concat_roles(a, b)) - entropy(t, b);
}

double mutual_information(const JointTable& t, const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return std::max(0.0, entropy(t, a) + entropy(t, b) - entropy(t, concat_roles(a, b)));
}

double min_entropy(const JointTable& t, const std::vector<std::string>& a) {
  double m = 0;
  for (const auto& [o, p] : t.marginal(a).p) m = std::max(m, p);
  return -std::log2(m);
}

double conditional_min_entropy(const JointTable& t, const std::vector<std::string>& a,
                               const std::vector<std::string>& b) {
  const JointTable ab = t.marginal(concat_roles(a, b)), pb = t.marginal(b);
  double worst = 0;
  for (const auto& [o, p] : ab.p) {
    std::vector<Symbols> kb(o.begin() + static_cast<long>(a.size()), o.end());
    worst = std::max(worst, p / pb.p.at(kb));
  }
  return -std::log2(worst);
}

double kl_divergence(const JointTable& p, const JointTable& q) {
  if (p.roles != q.roles) throw std::invalid_argument("KL divergence needs tables over the same roles");
  double d = 0;
  for (const auto& [o, pv] : p.p) {
    if (pv <= 0) continue;
    auto it = q.p.find(o);
    if (it == q.p.end() || it->second <= 0) return std::numeric_limits<double>::infinity();
    d += pv * std::log2(pv / it->second);
  }
  return std::max(d, 0.0);
}

double variational_distance(const JointTable& p, const JointTable& q) {
  if (p.roles != q.roles) throw std::invalid_argument("variational distance needs tables over the same roles");
  double v = 0;
  for (const auto& [o, pv] : p.p) {
    auto it = q.p.find(o);
    v += std::abs(pv - (it == q.p.end() ? 0.0 : it->second));
  }
  for (const auto& [o, qv] : q.p)
    if (!p.p.count(o)) v += qv;
  return v;
}

JointTable product_of_marginals(const JointTable& t, const std::vector<std::string>& a,
                                const std::vector<std::string>& b) {
  const JointTable pa = t.marginal(a), pb = t.marginal(b);
  JointTable out;
  out.roles = concat_roles(a, b);
  for (const auto& [oa, va] : pa.p)
    for (const auto& [ob, vb] : pb.p) {
      auto key = oa;
      key.insert(key.end(), ob.begin(), ob.end());
      out.p[std::move(key)] = va * vb;
    }
  return out;
}

InfoMeasures info_measures(const JointTable& p, const JointTable& q, const std::vector<std::string>& a,
                           const std::vector<std::string>& b) {
  InfoMeasures m;
  m.kl = kl_divergence(p, q);
  m.variational = variational_distance(p, q);
  m.mutual_information = mutual_information(p, a, b);
  m.min_entropy = min_entropy(p, a);
  m.conditional_entropy = conditional_entropy(p, a, b);
  return m;
}

// ---------------------------------------------------------------------------

CheckReport check_sampler_divergence(const WiretapCode& code, const ChannelFamily& family, std::uint64_t cap) {
  const auto& c = code.config;
  const std::size_t N = c.N();
  if (2 * N > 24) throw std::length_error("product law over 2^" + std::to_string(2 * N) + " outcomes is too large");
  ChannelFamily quiet = family;
  for (auto& m : quiet.mains) m = Dmc::noiseless();
  for (auto& e : quiet.eves) e = Dmc::noiseless();
  quiet.best_eve_weights.reset();
  const JointTable induced = enumerate_induced(code, quiet, {}, {{"U_1", "X_1"}, 1, EncoderKind::init_transmission, cap});
  JointTable target;
  target.roles = induced.roles;
  for (std::uint64_t w = 0; w < (std::uint64_t{1} << (2 * N)); ++w) {
    Symbols u(N), x(N);
    double p = 1;
    for (std::size_t i = 0; i < N; ++i) {
      u[i] = (w >> i) & 1;
      x[i] = (w >> (N + i)) & 1;
      p *= c.source.q(u[i], x[i]);
    }
    if (p > 0) target.p[{u, x}] = p;
  }
  CheckReport r;
  r.quantity = "D(q^N_UX || induced U,X)";
  r.exact_value = kl_divergence(target, induced);
  r.bound = 2.0 * static_cast<double>(c.L * c.K * c.pieces) * PolarParams::make(c.K, c.beta).delta();
  r.bound_ref = "2*L*K*delta_K";
  r.pass = r.exact_value <= r.bound;
  return r;
}

CheckReport check_leftover_hash(const WiretapCode& code, const ChannelFamily& family, const Exposure& exposure,
                                std::uint64_t cap) {
  const auto& c = code.config;
  const JointTable t = enumerate_induced(code, family, exposure,
                                         {{"M_1", "Mp_1", "R_1", "T_1", "Z_1", "XA_1"}, 1, EncoderKind::session, cap});
  CheckReport r;
  r.quantity = "V(p(Mbar,R,Z,XA), p(Mbar)p(R,Z,XA))";
  r.exact_value = independence_distance(t, {"M_1", "Mp_1"}, {"R_1", "Z_1", "XA_1"});
  const double h = conditional_min_entropy(t, {"T_1"}, {"Z_1", "XA_1"});
  r.bound = std::sqrt(std::exp2(static_cast<double>(c.r) - h));
  r.bound_ref = "sqrt(2^(r - H_min(T|Z,XA)))";
  const double V = r.exact_value, N = static_cast<double>(c.N());
  const double info = mutual_information(t, {"M_1"}, {"Z_1", "XA_1", "R_1"});
  const double f = V > 0 ? 1.2 * (V * N - V * std::log2(V)) : 0.0;
  r.extra["min_entropy"] = h;
  r.extra["r"] = static_cast<double>(c.r);
  r.extra["mutual_information"] = info;
  r.extra["f_bound"] = f;
  r.extra["leftover_pass"] = V <= r.bound + 1e-12;
  r.extra["f_bound_pass"] = info <= f + 1e-12;
  r.pass = V <= r.bound + 1e-12 && info <= f + 1e-12;
  return r;
}

double trimmed_min_entropy(const Eigen::MatrixXd& pxz, std::size_t n, double eps) {
  const auto cells = static_cast<std::size_t>(pxz.size());
  const Eigen::VectorXd pz = pxz.colwise().sum().transpose();
  struct Type {
    double ratio, w_joint, w_z;  // ratio = p(x^n|z^n); weights summed over the class
  };
  std::vector<Type> types;
  std::vector<std::size_t> cnt(cells, 0);
  // all compositions of n into `cells` parts
  auto visit = [&]() {
    double lj = 0, lz = 0, lmult = std::lgamma(static_cast<double>(n) + 1);
    std::vector<std::size_t> nz(static_cast<std::size_t>(pxz.cols()), 0);
    for (std::size_t k = 0; k < cells; ++k) {
      if (cnt[k] == 0) continue;
      const auto x = static_cast<Eigen::Index>(k % static_cast<std::size_t>(pxz.rows()));
      const auto z = static_cast<Eigen::Index>(k / static_cast<std::size_t>(pxz.rows()));
      if (pxz(x, z) <= 0) return;
      lj += static_cast<double>(cnt[k]) * std::log(pxz(x, z));
      lmult -= std::lgamma(static_cast<double>(cnt[k]) + 1);
      nz[static_cast<std::size_t>(z)] += cnt[k];
    }
    for (std::size_t z = 0; z < nz.size(); ++z)
      if (nz[z]) lz += static_cast<double>(nz[z]) * std::log(pz(static_cast<Eigen::Index>(z)));
    types.push_back({std::exp(lj - lz), std::exp(lmult + lj), std::exp(lmult + lz)});
  };
  auto rec = [&](auto&& self, std::size_t k, std::size_t left) -> void {
    if (k + 1 == cells) {
      cnt[k] = left;
      visit();
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      cnt[k] = v;
      self(self, k + 1, left - v);
    }
  };
  rec(rec, 0, n);
  std::sort(types.begin(), types.end(), [](const Type& a, const Type& b) { return a.ratio > b.ratio; });
  // removed(c) = sum over classes with ratio > c of (w_joint - c w_z)
  double sj = 0, sz = 0;
  for (std::size_t k = 0; k < types.size(); ++k) {
    sj += types[k].w_joint;
    sz += types[k].w_z;
    const double next = k + 1 < types.size() ? types[k + 1].ratio : 0.0;
    const double c = (sj - eps) / sz;
    if (c >= next) return c > 0 ? -std::log2(std::min(c, types[0].ratio)) : std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::infinity();
}

CheckReport check_smoothed_min_entropy(const Eigen::MatrixXd& pxz, std::size_t n, double d) {
  if (std::abs(pxz.sum() - 1.0) > 1e-12 || pxz.minCoeff() < 0) throw std::invalid_argument("pair law must be a distribution");
  const double lx = std::log2(static_cast<double>(pxz.rows()) + 3.0);
  const double eps = std::exp2(-static_cast<double>(n) * d * d / (2.0 * lx * lx));
  CheckReport r;
  r.quantity = "trimmed H_min^eps(X^n | Z^n)";
  r.exact_value = trimmed_min_entropy(pxz, n, eps);
  r.bound = static_cast<double>(n) * (conditional_entropy_rows_given_cols(pxz) - d);
  r.bound_ref = "n H(X|Z) - n d";
  r.pass = r.exact_value >= r.bound - 1e-12;
  r.extra["eps"] = eps;
  return r;
}

double delta4(std::size_t K, std::size_t L, double xi, double gamma) {
  const double N = static_cast<double>(K * L);
  const double a = std::exp2(1.0 - std::pow(static_cast<double>(L), gamma)) + std::sqrt(std::exp2(-N * xi));
  return a * (N - std::log2(a));
}

JointLeakage joint_block_leakage(const WiretapCode& code, const ChannelFamily& family, const Exposure& exposure,
                                 std::uint64_t cap) {
  const auto& c = code.config;
  const std::size_t B = c.B;
  if (B > 3) throw std::invalid_argument("joint enumeration supports at most 3 blocks");
  std::vector<std::string> roles, ms, obs;
  for (std::size_t b = 1; b <= B; ++b)
    for (const char* n : {"M", "Mp", "R", "Z", "XA"}) roles.push_back(with_block(n, b));
  const JointTable t = enumerate_induced(code, family, exposure, {roles, B, EncoderKind::session, cap});
  JointLeakage out;
  double sum = 0;
  for (std::size_t b = 1; b <= B; ++b) {
    ms.push_back(with_block("M", b));
    for (const char* n : {"Z", "XA", "R"}) obs.push_back(with_block(n, b));
    out.per_block.push_back(mutual_information(t, {with_block("M", b), with_block("Mp", b)},
                                               {with_block("Z", b), with_block("XA", b), with_block("R", b)}));
    sum += out.per_block.back();
  }
  out.joint = mutual_information(t, ms, obs);
  if (B >= 2) out.messages_dependence = mutual_information(t, {ms[0]}, std::vector<std::string>(ms.begin() + 1, ms.end()));
  for (double g : {0.25, 0.5, 0.9}) out.delta4_bound[g] = 2.0 * static_cast<double>(B) * delta4(c.K * c.pieces, c.L, c.xi, g);
  out.report.quantity = "I(M_1:B; Z_1:B, XA_1:B, R_1:B)";
  out.report.exact_value = out.joint;
  out.report.bound = 2.0 * sum;
  out.report.bound_ref = "2 * sum_b I(M_b M'_b; Z_b, XA_b, R_b)";
  out.report.pass = out.joint <= out.report.bound + 1e-12;
  return out;
}

CheckReport check_best_eve_bound(const WiretapCode& code, const ChannelFamily& family, std::uint32_t best,
                                 std::uint64_t cap) {
  if (best >= family.eves.size()) throw std::out_of_range("best eavesdropper state out of range");
  std::vector<double> w(family.eves.size(), 0.0);
  w[best] = 1.0;
  const auto cert = check_degraded(family, w);
  CheckReport r;
  r.quantity = "I(M; Z, XA, R) under alternating eavesdropper states";
  r.bound_ref = "same quantity at the best state alone + 1e-9";
  r.extra["certificate"] = cert.degraded;
  if (!cert.degraded) {
    r.pass = false;
    return r;
  }
  const std::vector<std::string> roles = {"M_1", "R_1", "Z_1", "XA_1"};
  Exposure mixed, fixed;
  mixed.eve_states = Exposure::EveStates::alternating;
  fixed.eve_state = best;
  const auto tm = enumerate_induced(code, family, mixed, {roles, 1, EncoderKind::session, cap});
  const auto tf = enumerate_induced(code, family, fixed, {roles, 1, EncoderKind::session, cap});
  r.exact_value = mutual_information(tm, {"M_1"}, {"Z_1", "XA_1", "R_1"});
  r.bound = mutual_information(tf, {"M_1"}, {"Z_1", "XA_1", "R_1"}) + 1e-9;
  r.pass = r.exact_value <= r.bound;
  return r;
}

}  // namespace wiretap
