#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace wiretap {

using Bit = std::uint8_t;
using BitVector = std::vector<Bit>;
// Sorted, 0-based positions.
using IndexSet = std::vector<std::size_t>;

inline bool is_power_of_two(std::size_t k) { return k != 0 && (k & (k - 1)) == 0; }

inline unsigned log2_exact(std::size_t k) {
  unsigned m = 0;
  while ((std::size_t{1} << m) < k) ++m;
  return m;
}

BitVector concat(std::initializer_list<std::span<const Bit>> parts);
void append(BitVector& dst, std::span<const Bit> src);
BitVector gather(std::span<const Bit> bits, const IndexSet& positions);
void scatter(std::span<Bit> bits, const IndexSet& positions, std::span<const Bit> values);
BitVector xor_bits(std::span<const Bit> a, std::span<const Bit> b);
BitVector slice(std::span<const Bit> bits, std::size_t offset, std::size_t length);

IndexSet set_difference(const IndexSet& a, const IndexSet& b);
IndexSet set_intersection(const IndexSet& a, const IndexSet& b);
IndexSet set_union(const IndexSet& a, const IndexSet& b);
bool is_subset(const IndexSet& a, const IndexSet& b);
std::vector<bool> membership(const IndexSet& s, std::size_t size);

// "0101..." text form used in JSON artifacts.
std::string to_string(std::span<const Bit> bits);
BitVector from_string(const std::string& text);

// Packs into words, position i -> word i/64, bit i%64.
std::vector<std::uint64_t> pack(std::span<const Bit> bits);
BitVector unpack(std::span<const std::uint64_t> words, std::size_t length);

}  // namespace wiretap
