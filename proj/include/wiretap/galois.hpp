#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wiretap/bits.hpp"

namespace wiretap {

// GF(2^n) defined by an irreducible modulus, stored as the list of exponents
// with nonzero coefficient (descending, first entry n, last entry 0).
struct FieldSpec {
  unsigned n = 0;
  std::vector<unsigned> terms;

  static FieldSpec from_terms(std::vector<unsigned> exponents);
  // Bit form of length n+1, leftmost = coefficient of x^n.
  static FieldSpec from_bits(std::span<const Bit> modulus);
  BitVector modulus_bits() const;
  std::string describe() const;  // "x^8+x^4+x^3+x+1"
  std::size_t words() const { return (n + 63) / 64; }
  bool operator==(const FieldSpec&) const = default;
};

// Polynomial of degree < n. Internally little-endian words (bit i = coefficient
// of x^i); the external bit order puts the x^{n-1} coefficient first.
class FieldElem {
 public:
  FieldElem() = default;
  explicit FieldElem(unsigned n) : n_(n), w_((n + 63) / 64, 0) {}

  static FieldElem zero(unsigned n) { return FieldElem(n); }
  static FieldElem one(unsigned n);
  static FieldElem from_bits(std::span<const Bit> bits);
  static FieldElem from_words(unsigned n, std::vector<std::uint64_t> words);
  static FieldElem from_hex(unsigned n, const std::string& hex);

  BitVector bits() const;
  std::string to_hex() const;

  unsigned n() const { return n_; }
  const std::vector<std::uint64_t>& words() const { return w_; }
  std::vector<std::uint64_t>& words() { return w_; }
  bool is_zero() const;
  bool is_one() const;
  bool coeff(unsigned i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }

  FieldElem& operator^=(const FieldElem& o);
  friend FieldElem operator^(FieldElem a, const FieldElem& b) { return a ^= b; }
  bool operator==(const FieldElem&) const = default;

 private:
  unsigned n_ = 0;
  std::vector<std::uint64_t> w_;
};

enum class ClmulPath { automatic, hardware, portable };

bool clmul_hardware_available();

FieldElem gf_mul(const FieldElem& a, const FieldElem& b, const FieldSpec& spec,
                 ClmulPath path = ClmulPath::automatic);
FieldElem gf_square(const FieldElem& a, const FieldSpec& spec);
FieldElem gf_inv(const FieldElem& a, const FieldSpec& spec);

// Leftmost out_len bits of r*t.
BitVector uh_hash(const FieldElem& r, const FieldElem& t, std::size_t out_len, const FieldSpec& spec);
// r^{-1} * payload, so that the hash of the result returns the payload prefix.
FieldElem hash_preimage(const FieldElem& r, std::span<const Bit> payload, const FieldSpec& spec);

// Lowest-weight irreducible of degree n: the trinomial x^n+x^k+1 with the
// smallest k, otherwise the pentanomial x^n+x^a+x^b+x^c+1 with (a, b, c)
// lexicographically smallest. Entries for n <= 32 are re-verified by trial
// division; larger degrees come from data/moduli.txt or a deterministic search.
FieldSpec std_modulus(unsigned n);
unsigned max_supported_degree();

// Rabin's test (x^{2^n} = x mod f and gcd(x^{2^{n/p}} - x, f) = 1).
bool is_irreducible(const FieldSpec& f);
// Exhaustive trial division by every polynomial of degree <= n/2 (n <= 32).
bool is_irreducible_trial_division(const FieldSpec& f);

namespace detail {
// Carry-less product of two word arrays (result size a.size() + b.size()).
void clmul_words(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                 std::span<std::uint64_t> out, ClmulPath path);
// Reduces a polynomial of degree < 2n modulo spec in place; result in the first words.
void reduce_words(std::vector<std::uint64_t>& p, const FieldSpec& spec);
}  // namespace detail

}  // namespace wiretap
