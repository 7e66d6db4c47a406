#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "wiretap/bits.hpp"

namespace wiretap {

// Every random choice made by the encoders goes through this interface, so the
// same code path can be driven by a PRNG or by the exhaustive enumerator.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  // Returns 0 with probability p0.
  virtual Bit bernoulli(double p0) = 0;
  virtual std::size_t categorical(std::span<const double> probs) = 0;
  virtual BitVector uniform_bits(std::size_t n) = 0;
  // Uniform over the 2^n - 1 nonzero strings.
  virtual BitVector uniform_nonzero_bits(std::size_t n) = 0;
  virtual std::size_t uniform_index(std::size_t n) = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Seed of stream `stream` under master seed `master`:
// splitmix64(master ^ splitmix64(stream + 1)). Parallel and serial runs use the
// same derivation, so results do not depend on the worker count.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

class RngSource final : public RandomSource {
 public:
  explicit RngSource(std::uint64_t seed) : engine_(seed) {}

  Bit bernoulli(double p0) override;
  std::size_t categorical(std::span<const double> probs) override;
  BitVector uniform_bits(std::size_t n) override;
  BitVector uniform_nonzero_bits(std::size_t n) override;
  std::size_t uniform_index(std::size_t n) override;

  double uniform01();
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Walks every execution path of a randomized procedure. Each call to run()
// replays the current path, branching at the first unexplored choice; the
// weight of the finished path is the product of the chosen probabilities.
// Zero-probability branches are never visited.
class ChoiceExplorer final : public RandomSource {
 public:
  explicit ChoiceExplorer(std::size_t max_outcomes_per_choice = std::size_t{1} << 20)
      : max_outcomes_(max_outcomes_per_choice) {}

  // Advances to the next path; returns false once all paths were visited.
  bool next_path();
  double path_probability() const { return weight_; }
  std::uint64_t paths_visited() const { return visited_; }

  Bit bernoulli(double p0) override;
  std::size_t categorical(std::span<const double> probs) override;
  BitVector uniform_bits(std::size_t n) override;
  BitVector uniform_nonzero_bits(std::size_t n) override;
  std::size_t uniform_index(std::size_t n) override;

 private:
  struct Choice {
    std::vector<double> probs;  // empty means uniform over `count`
    std::size_t count;
    std::size_t taken;
  };
  std::size_t choose(std::vector<double> probs, std::size_t count);
  std::size_t first_valid(const Choice& c, std::size_t from) const;
  double prob_of(const Choice& c, std::size_t k) const;

  std::vector<Choice> stack_;
  std::size_t depth_ = 0;
  double weight_ = 1.0;
  bool started_ = false;
  std::uint64_t visited_ = 0;
  std::size_t max_outcomes_;
};

}  // namespace wiretap
