#include "wiretap/random.hpp"

#include <stdexcept>

namespace wiretap {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 1));
}

double RngSource::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

Bit RngSource::bernoulli(double p0) { return uniform01() < p0 ? 0 : 1; }

std::size_t RngSource::categorical(std::span<const double> probs) {
  double u = uniform01();
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    acc += probs[k];
    last = k;
    if (u < acc) return k;
  }
  return last;
}

BitVector RngSource::uniform_bits(std::size_t n) {
  BitVector out(n);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if ((i & 63) == 0) word = engine_();
    out[i] = (word >> (i & 63)) & 1u;
  }
  return out;
}

BitVector RngSource::uniform_nonzero_bits(std::size_t n) {
  if (n == 0) throw std::invalid_argument("no nonzero string of length 0");
  for (;;) {
    auto b = uniform_bits(n);
    for (auto x : b)
      if (x) return b;
  }
}

std::size_t RngSource::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index over empty range");
  std::uniform_int_distribution<std::size_t> d(0, n - 1);
  return d(engine_);
}

bool ChoiceExplorer::next_path() {
  depth_ = 0;
  weight_ = 1.0;
  if (!started_) {
    started_ = true;
    ++visited_;
    return true;
  }
  while (!stack_.empty()) {
    auto& top = stack_.back();
    std::size_t nxt = first_valid(top, top.taken + 1);
    if (nxt < top.count) {
      top.taken = nxt;
      ++visited_;
      return true;
    }
    stack_.pop_back();
  }
  return false;
}

double ChoiceExplorer::prob_of(const Choice& c, std::size_t k) const {
  return c.probs.empty() ? 1.0 / static_cast<double>(c.count) : c.probs[k];
}

std::size_t ChoiceExplorer::first_valid(const Choice& c, std::size_t from) const {
  std::size_t k = from;
  while (k < c.count && prob_of(c, k) <= 0.0) ++k;
  return k;
}

std::size_t ChoiceExplorer::choose(std::vector<double> probs, std::size_t count) {
  if (count > max_outcomes_) throw std::length_error("choice has too many outcomes to enumerate");
  if (depth_ < stack_.size()) {
    auto& c = stack_[depth_];
    if (c.count != count) throw std::logic_error("non-deterministic replay in ChoiceExplorer");
    ++depth_;
    weight_ *= prob_of(c, c.taken);
    return c.taken;
  }
  Choice c{std::move(probs), count, 0};
  c.taken = first_valid(c, 0);
  if (c.taken >= count) throw std::logic_error("choice with no positive-probability outcome");
  weight_ *= prob_of(c, c.taken);
  stack_.push_back(std::move(c));
  ++depth_;
  return stack_.back().taken;
}

Bit ChoiceExplorer::bernoulli(double p0) { return static_cast<Bit>(choose({p0, 1.0 - p0}, 2)); }

std::size_t ChoiceExplorer::categorical(std::span<const double> probs) {
  return choose(std::vector<double>(probs.begin(), probs.end()), probs.size());
}

BitVector ChoiceExplorer::uniform_bits(std::size_t n) {
  if (n >= 63) throw std::length_error("uniform_bits too wide to enumerate");
  std::size_t k = choose({}, std::size_t{1} << n);
  BitVector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (k >> (n - 1 - i)) & 1u;
  return out;
}

BitVector ChoiceExplorer::uniform_nonzero_bits(std::size_t n) {
  if (n == 0) throw std::invalid_argument("no nonzero string of length 0");
  if (n >= 63) throw std::length_error("uniform_nonzero_bits too wide to enumerate");
  std::size_t k = choose({}, (std::size_t{1} << n) - 1) + 1;
  BitVector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (k >> (n - 1 - i)) & 1u;
  return out;
}

std::size_t ChoiceExplorer::uniform_index(std::size_t n) { return choose({}, n); }

}  // namespace wiretap
