#include "wiretap/bits.hpp"

#include <algorithm>
#include <stdexcept>

namespace wiretap {

BitVector concat(std::initializer_list<std::span<const Bit>> parts) {
  BitVector out;
  for (auto p : parts) append(out, p);
  return out;
}

void append(BitVector& dst, std::span<const Bit> src) { dst.insert(dst.end(), src.begin(), src.end()); }

BitVector gather(std::span<const Bit> bits, const IndexSet& positions) {
  BitVector out;
  out.reserve(positions.size());
  for (auto i : positions) out.push_back(bits[i]);
  return out;
}

void scatter(std::span<Bit> bits, const IndexSet& positions, std::span<const Bit> values) {
  if (values.size() != positions.size()) throw std::invalid_argument("scatter: size mismatch");
  for (std::size_t k = 0; k < positions.size(); ++k) bits[positions[k]] = values[k];
}

BitVector xor_bits(std::span<const Bit> a, std::span<const Bit> b) {
  if (a.size() != b.size()) throw std::invalid_argument("xor_bits: size mismatch");
  BitVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

BitVector slice(std::span<const Bit> bits, std::size_t offset, std::size_t length) {
  if (offset + length > bits.size()) throw std::out_of_range("slice out of range");
  return BitVector(bits.begin() + offset, bits.begin() + offset + length);
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool is_subset(const IndexSet& a, const IndexSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

std::vector<bool> membership(const IndexSet& s, std::size_t size) {
  std::vector<bool> m(size, false);
  for (auto i : s) m.at(i) = true;
  return m;
}

std::string to_string(std::span<const Bit> bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
  return s;
}

BitVector from_string(const std::string& text) {
  BitVector out(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '0' && text[i] != '1') throw std::invalid_argument("bit string must contain only 0/1");
    out[i] = text[i] == '1';
  }
  return out;
}

std::vector<std::uint64_t> pack(std::span<const Bit> bits) {
  std::vector<std::uint64_t> w((bits.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) w[i >> 6] |= std::uint64_t{1} << (i & 63);
  return w;
}

BitVector unpack(std::span<const std::uint64_t> words, std::size_t length) {
  BitVector out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = (words[i >> 6] >> (i & 63)) & 1u;
  return out;
}

}  // namespace wiretap
