#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wiretap/bits.hpp"
#include "wiretap/random.hpp"

namespace wiretap {

using Symbols = std::vector<std::uint32_t>;
using TransitionTable = Eigen::Matrix<double, 2, Eigen::Dynamic>;

// Binary-input discrete memoryless channel; row x is p(.|x).
struct Dmc {
  std::string name;
  TransitionTable table;

  std::size_t outputs() const { return static_cast<std::size_t>(table.cols()); }
  double operator()(Bit x, std::size_t y) const { return table(x, static_cast<Eigen::Index>(y)); }
  void validate() const;

  static Dmc bsc(double p);
  // Outputs: 0, 1, erasure (index 2).
  static Dmc bec(double eps);
  static Dmc noiseless();
  // Output independent of the input, with law `pz`.
  static Dmc pure_noise(const Eigen::VectorXd& pz);
  static Dmc from_table(TransitionTable table, std::string name = "table");
};

// Exact rational tap fraction; alpha * N must be an integer.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Fraction parse(const std::string& text);  // "1/4", "0.25", "0"
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
};

struct ChannelFamily {
  std::vector<Dmc> mains;
  std::vector<Dmc> eves;
  // Mixture weights over `eves` describing the declared best eavesdropper channel.
  std::optional<std::vector<double>> best_eve_weights;

  void validate() const;
  Dmc best_eve() const;
};

struct StateSequence {
  enum class Generator { constant, iid, explicit_list };
  Generator generator = Generator::constant;
  std::vector<std::uint32_t> t;  // main-channel state per use
  std::vector<std::uint32_t> s;  // eavesdropper state per use

  static StateSequence constant(std::size_t n, std::uint32_t t, std::uint32_t s);
  static StateSequence alternating_eve(std::size_t n, std::uint32_t t, std::size_t eve_count);
  static StateSequence iid(std::size_t n, std::uint32_t t, const std::vector<double>& eve_weights, RandomSource& rng);
  static StateSequence explicit_list(std::vector<std::uint32_t> t, std::vector<std::uint32_t> s);
  std::size_t size() const { return t.size(); }
};

struct ChannelOutput {
  Symbols y;
  Symbols z;
};

Symbols transmit_dmc(std::span<const Bit> x, const Dmc& channel, RandomSource& rng);
ChannelOutput transmit(std::span<const Bit> x, const StateSequence& states, const ChannelFamily& family,
                       RandomSource& rng);

enum class TapStrategy { first, random, custom };
TapStrategy parse_tap_strategy(const std::string& name);
std::string to_string(TapStrategy s);

// |result| = alpha * n; positions are 0-based and sorted.
IndexSet choose_tap(TapStrategy strategy, Fraction alpha, std::size_t n, RandomSource& rng,
                    const IndexSet& custom = {});

struct DegradationCertificate {
  bool degraded = false;
  // maps[s] is row-stochastic with best * maps[s] = eves[s].
  std::vector<Eigen::MatrixXd> maps;
  std::optional<std::size_t> failing_state;
  std::string reason;
};

DegradationCertificate check_degraded(const ChannelFamily& family, const std::vector<double>& best_weights);

namespace detail {
// Phase-one simplex: a nonnegative w with A w = b (b >= 0), or nullopt.
std::optional<Eigen::VectorXd> feasible_point(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);
}  // namespace detail

}  // namespace wiretap
