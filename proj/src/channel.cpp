#include "wiretap/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wiretap {

void Dmc::validate() const {
  if (table.cols() < 1) throw std::invalid_argument("channel '" + name + "' has no outputs");
  for (Eigen::Index x = 0; x < 2; ++x) {
    if ((table.row(x).array() < 0.0).any()) throw std::invalid_argument("channel '" + name + "' has negative entries");
    if (std::abs(table.row(x).sum() - 1.0) > 1e-12)
      throw std::invalid_argument("channel '" + name + "' row does not sum to 1");
  }
}

Dmc Dmc::bsc(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("BSC crossover must lie in [0,1]");
  TransitionTable t(2, 2);
  t << 1.0 - p, p, p, 1.0 - p;
  return {"bsc(" + std::to_string(p) + ")", t};
}

Dmc Dmc::bec(double eps) {
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("BEC erasure probability must lie in [0,1]");
  TransitionTable t(2, 3);
  t << 1.0 - eps, 0.0, eps, 0.0, 1.0 - eps, eps;
  return {"bec(" + std::to_string(eps) + ")", t};
}

Dmc Dmc::noiseless() {
  TransitionTable t(2, 2);
  t << 1.0, 0.0, 0.0, 1.0;
  return {"noiseless", t};
}

Dmc Dmc::pure_noise(const Eigen::VectorXd& pz) {
  TransitionTable t(2, pz.size());
  t.row(0) = pz.transpose();
  t.row(1) = pz.transpose();
  Dmc d{"pure_noise", t};
  d.validate();
  return d;
}

Dmc Dmc::from_table(TransitionTable table, std::string name) {
  Dmc d{std::move(name), std::move(table)};
  d.validate();
  return d;
}

Fraction Fraction::parse(const std::string& text) {
  auto reduce = [](Fraction f) {
    if (f.den == 0) throw std::invalid_argument("fraction with zero denominator");
    if (f.den < 0) {
      f.num = -f.num;
      f.den = -f.den;
    }
    auto g = std::gcd(f.num, f.den);
    if (g > 1) {
      f.num /= g;
      f.den /= g;
    }
    return f;
  };
  if (auto slash = text.find('/'); slash != std::string::npos)
    return reduce({std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1))});
  // terminating decimal, parsed exactly
  std::size_t pos = 0;
  bool neg = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) neg = text[pos++] == '-';
  std::int64_t num = 0, den = 1;
  bool frac = false, any = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c == '.') {
      if (frac) throw std::invalid_argument("malformed fraction '" + text + "'");
      frac = true;
    } else if (c >= '0' && c <= '9') {
      if (den > (std::int64_t{1} << 50)) throw std::invalid_argument("fraction has too many digits");
      num = num * 10 + (c - '0');
      if (frac) den *= 10;
      any = true;
    } else {
      throw std::invalid_argument("malformed fraction '" + text + "'");
    }
  }
  if (!any) throw std::invalid_argument("malformed fraction '" + text + "'");
  return reduce({neg ? -num : num, den});
}

std::string Fraction::str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

void ChannelFamily::validate() const {
  if (mains.empty() || eves.empty()) throw std::invalid_argument("channel family needs at least one main and one eavesdropper channel");
  for (const auto& c : mains) c.validate();
  for (const auto& c : eves) c.validate();
  if (best_eve_weights) {
    const auto& w = *best_eve_weights;
    if (w.size() != eves.size()) throw std::invalid_argument("best-eve weights must have one entry per eavesdropper state");
    double total = 0.0;
    for (double v : w) {
      if (v < 0.0) throw std::invalid_argument("best-eve weights must be nonnegative");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("best-eve weights must sum to 1");
  }
}

Dmc ChannelFamily::best_eve() const {
  if (!best_eve_weights) throw std::logic_error("no best eavesdropper channel declared");
  const auto& w = *best_eve_weights;
  TransitionTable t = TransitionTable::Zero(2, eves.front().table.cols());
  for (std::size_t s = 0; s < eves.size(); ++s) {
    if (eves[s].table.cols() != t.cols()) throw std::invalid_argument("mixture requires a common output alphabet");
    t += w[s] * eves[s].table;
  }
  return {"best_eve", t};
}

StateSequence StateSequence::constant(std::size_t n, std::uint32_t t, std::uint32_t s) {
  return {Generator::constant, std::vector<std::uint32_t>(n, t), std::vector<std::uint32_t>(n, s)};
}

StateSequence StateSequence::alternating_eve(std::size_t n, std::uint32_t t, std::size_t eve_count) {
  StateSequence seq{Generator::explicit_list, std::vector<std::uint32_t>(n, t), std::vector<std::uint32_t>(n)};
  for (std::size_t i = 0; i < n; ++i) seq.s[i] = static_cast<std::uint32_t>(i % eve_count);
  return seq;
}

StateSequence StateSequence::iid(std::size_t n, std::uint32_t t, const std::vector<double>& eve_weights,
                                 RandomSource& rng) {
  StateSequence seq{Generator::iid, std::vector<std::uint32_t>(n, t), std::vector<std::uint32_t>(n)};
  for (std::size_t i = 0; i < n; ++i) seq.s[i] = static_cast<std::uint32_t>(rng.categorical(eve_weights));
  return seq;
}

StateSequence StateSequence::explicit_list(std::vector<std::uint32_t> t, std::vector<std::uint32_t> s) {
  if (t.size() != s.size()) throw std::invalid_argument("state lists differ in length");
  return {Generator::explicit_list, std::move(t), std::move(s)};
}

Symbols transmit_dmc(std::span<const Bit> x, const Dmc& channel, RandomSource& rng) {
  Symbols out(x.size());
  const auto m = channel.outputs();
  std::vector<double> row0(m), row1(m);
  for (std::size_t k = 0; k < m; ++k) {
    row0[k] = channel(0, k);
    row1[k] = channel(1, k);
  }
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = static_cast<std::uint32_t>(rng.categorical(x[i] ? row1 : row0));
  return out;
}

namespace {

std::vector<std::array<std::vector<double>, 2>> rows_of(const std::vector<Dmc>& channels) {
  std::vector<std::array<std::vector<double>, 2>> rows(channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c)
    for (Bit x = 0; x < 2; ++x)
      for (std::size_t k = 0; k < channels[c].outputs(); ++k) rows[c][x].push_back(channels[c](x, k));
  return rows;
}

}  // namespace

ChannelOutput transmit(std::span<const Bit> x, const StateSequence& states, const ChannelFamily& family,
                       RandomSource& rng) {
  if (states.size() != x.size()) throw std::invalid_argument("state sequence length does not match input");
  const auto mains = rows_of(family.mains), eves = rows_of(family.eves);
  ChannelOutput out{Symbols(x.size()), Symbols(x.size())};
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (states.t[i] >= family.mains.size() || states.s[i] >= family.eves.size())
      throw std::out_of_range("channel state index out of bounds");
    out.y[i] = static_cast<std::uint32_t>(rng.categorical(mains[states.t[i]][x[i]]));
    out.z[i] = static_cast<std::uint32_t>(rng.categorical(eves[states.s[i]][x[i]]));
  }
  return out;
}

TapStrategy parse_tap_strategy(const std::string& name) {
  if (name == "first") return TapStrategy::first;
  if (name == "random") return TapStrategy::random;
  if (name == "custom") return TapStrategy::custom;
  throw std::invalid_argument("unknown tap strategy '" + name + "'");
}

std::string to_string(TapStrategy s) {
  switch (s) {
    case TapStrategy::first: return "first";
    case TapStrategy::random: return "random";
    case TapStrategy::custom: return "custom";
  }
  return "?";
}

IndexSet choose_tap(TapStrategy strategy, Fraction alpha, std::size_t n, RandomSource& rng, const IndexSet& custom) {
  if (alpha.num < 0 || alpha.num > alpha.den) throw std::invalid_argument("tap fraction must lie in [0,1]");
  const auto scaled = static_cast<std::int64_t>(n) * alpha.num;
  if (scaled % alpha.den != 0)
    throw std::invalid_argument("alpha*N = " + alpha.str() + "*" + std::to_string(n) + " is not an integer");
  const auto count = static_cast<std::size_t>(scaled / alpha.den);
  IndexSet out;
  switch (strategy) {
    case TapStrategy::first:
      for (std::size_t i = 0; i < count; ++i) out.push_back(i);
      break;
    case TapStrategy::random: {
      // partial Fisher-Yates driven by the supplied source
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + rng.uniform_index(n - i);
        std::swap(perm[i], perm[j]);
      }
      out.assign(perm.begin(), perm.begin() + static_cast<long>(count));
      std::sort(out.begin(), out.end());
      break;
    }
    case TapStrategy::custom:
      out = custom;
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      if (out.size() != count) throw std::invalid_argument("custom tap set must contain exactly alpha*N positions");
      if (!out.empty() && out.back() >= n) throw std::out_of_range("custom tap position out of range");
      break;
  }
  return out;
}

namespace detail {

std::optional<Eigen::VectorXd> feasible_point(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index m = a.rows(), n = a.cols();
  constexpr double tol = 1e-12;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m).setIdentity();
  t.col(n + m).head(m) = b;
  for (Eigen::Index i = 0; i < m; ++i)
    if (b(i) < 0) t.row(i) *= -1.0;
  // reduced costs for "minimize sum of artificials"
  t.row(m).head(n) = -t.topLeftCorner(m, n).colwise().sum();
  t(m, n + m) = -t.col(n + m).head(m).sum();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  std::iota(basis.begin(), basis.end(), n);

  for (int iter = 0; iter < 100000; ++iter) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n; ++j)
      if (t(m, j) < -tol) {
        enter = j;
        break;
      }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) <= tol) continue;
      double ratio = t(i, n + m) / t(i, enter);
      if (leave < 0 || ratio < best - tol ||
          (ratio <= best + tol && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) break;
    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i)
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  if (-t(m, n + m) > 1e-10) return std::nullopt;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i)
    if (basis[static_cast<std::size_t>(i)] < n) w(basis[static_cast<std::size_t>(i)]) = std::max(0.0, t(i, n + m));
  return w;
}

}  // namespace detail

DegradationCertificate check_degraded(const ChannelFamily& family, const std::vector<double>& best_weights) {
  ChannelFamily f = family;
  f.best_eve_weights = best_weights;
  f.validate();
  const Dmc best = f.best_eve();
  const auto mb = static_cast<Eigen::Index>(best.outputs());
  DegradationCertificate cert;
  for (std::size_t s = 0; s < f.eves.size(); ++s) {
    const auto& target = f.eves[s].table;
    const auto ms = target.cols();
    if (mb > 16 || ms > 16) throw std::length_error("degradation check limited to alphabets of size 16");
    // unknowns W(i,j) row-major; constraints: best*W = target, rows of W sum to 1
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * ms + mb, mb * ms);
    Eigen::VectorXd rhs(2 * ms + mb);
    for (Eigen::Index x = 0; x < 2; ++x)
      for (Eigen::Index j = 0; j < ms; ++j) {
        for (Eigen::Index i = 0; i < mb; ++i) a(x * ms + j, i * ms + j) = best.table(x, i);
        rhs(x * ms + j) = target(x, j);
      }
    for (Eigen::Index i = 0; i < mb; ++i) {
      a.block(2 * ms + i, i * ms, 1, ms).setOnes();
      rhs(2 * ms + i) = 1.0;
    }
    auto w = detail::feasible_point(a, rhs);
    bool ok = false;
    Eigen::MatrixXd map(mb, ms);
    if (w) {
      for (Eigen::Index i = 0; i < mb; ++i)
        for (Eigen::Index j = 0; j < ms; ++j) map(i, j) = (*w)(i * ms + j);
      // rows of W attached to zero-probability outputs of the best channel are unconstrained
      for (Eigen::Index i = 0; i < mb; ++i)
        if (std::abs(map.row(i).sum() - 1.0) > 1e-9) map.row(i).setConstant(1.0 / static_cast<double>(ms));
      Eigen::MatrixXd composed = best.table * map;
      ok = ((composed - target).cwiseAbs().maxCoeff() <= 1e-9) && (map.array() >= 0.0).all();
    }
    if (!ok) {
      cert.degraded = false;
      cert.failing_state = s;
      cert.reason = "no stochastic map takes the declared best channel to eavesdropper state " + std::to_string(s) +
                    " (" + f.eves[s].name + ")";
      cert.maps.clear();
      return cert;
    }
    cert.maps.push_back(map);
  }
  cert.degraded = true;
  return cert;
}

}  // namespace wiretap
