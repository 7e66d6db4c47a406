#pragma once

#include <cstdint>
#include <vector>

#include "wiretap/codec.hpp"

namespace wiretap {

// Chained source coding with compound side information over T_J polar
// blocks of length K. j is 1-based throughout, as in the recursion.
struct CompoundSpec {
  std::size_t K = 0;
  std::vector<std::size_t> multipliers;  // t_1 = 1
  IndexSet V;                            // V_U (or V_X on the channel side)
  std::vector<IndexSet> H, Vj;           // H_{.|Y_j}, V_{.|Y_j}
  std::vector<BitLaw> laws;              // SC decoding law of decoder j

  std::size_t J() const { return multipliers.size(); }
  std::size_t T(std::size_t j) const;  // t_1 ... t_j, T(0) = 1
  std::size_t pieces() const { return T(J()); }
  std::size_t length() const { return K * pieces(); }
  std::size_t e_length(std::size_t level) const;  // |e^{(level)}|
  std::size_t f_length(std::size_t level) const;  // |f^{(level)}|, level < J
  std::size_t e_length() const { return e_length(J()); }
  std::size_t residue_length(std::size_t j) const { return H[j - 1].size() - Vj[j - 1].size(); }
  std::size_t e_prime_length() const;
  void validate() const;
};

struct ChainedCode {
  BitVector E, E_prime;
};

// a: polarized pieces A_1 .. A_{T_J}, concatenated.
ChainedCode css_encode_polar(std::span<const Bit> a, const CompoundSpec& spec);
ChainedCode css_encode(std::span<const Bit> u, const CompoundSpec& spec);
// Returns the polarized pieces (css_decode: the source-domain sequence).
BitVector css_decode_polar(std::size_t j0, std::span<const std::uint32_t> y, std::span<const Bit> E,
                           std::span<const Bit> E_prime, const CompoundSpec& spec);
BitVector css_decode(std::size_t j0, std::span<const std::uint32_t> y, std::span<const Bit> E,
                     std::span<const Bit> E_prime, const CompoundSpec& spec);

// |E| = parts*q + r: r sets of size q+1, then parts-r of size q.
std::vector<std::size_t> euclid_split(std::size_t total, std::size_t parts);

struct CccEncoded {
  std::vector<BitVector> codewords;  // B*T_J codewords of length K, block-major
  std::vector<BitVector> e_prime;    // E'_b per block
  BitVector e_last;                  // E_B
};

// Compound channel code with uniform input: V_X is every index, A_t the
// lowest |A_t| indices.
class CompoundChannelCode {
 public:
  static CompoundChannelCode build(const std::vector<Dmc>& mains, std::size_t K, std::vector<std::size_t> multipliers,
                                   double beta, const ProfileOptions& opt);
  static CompoundChannelCode from_spec(CompoundSpec spec);
  const CompoundSpec& spec() const { return spec_; }
  const std::vector<IndexSet>& chain_sets() const { return A_; }
  std::size_t message_length() const;  // per block, sum_t |V_X \ A_t|
  std::size_t piece_message_length(std::size_t t) const { return spec_.K - A_[t].size(); }
  CccEncoded encode(const std::vector<BitVector>& messages, RandomSource& rng) const;
  std::vector<BitVector> decode(std::size_t j, const std::vector<Symbols>& y, std::span<const Bit> e_last,
                                const std::vector<BitVector>& e_prime) const;

 private:
  CompoundSpec spec_;
  std::vector<IndexSet> A_;
};

// The wiretap coder built on css (decoder index = main state + 1).
class CompoundSideInfoCoder final : public SideInfoCoder {
 public:
  explicit CompoundSideInfoCoder(CompoundSpec spec) : spec_(std::move(spec)) { spec_.validate(); }
  std::size_t e_length() const override { return spec_.e_length(); }
  std::size_t e_prime_length() const override { return spec_.e_prime_length(); }
  std::pair<BitVector, BitVector> encode(std::span<const Bit> a) const override;
  BitVector decode(std::uint32_t main_state, std::span<const std::uint32_t> y, std::span<const Bit> e,
                   std::span<const Bit> e_prime) const override;
  const CompoundSpec& spec() const { return spec_; }

 private:
  CompoundSpec spec_;
};

// Aux transport through the compound channel code; its E' and E_B travel
// through one polar code per main channel at the worst-channel rate.
class CompoundAuxTransport final : public AuxTransport {
 public:
  CompoundAuxTransport(CompoundChannelCode ccc, std::vector<PolarChannelCode> side_codes)
      : ccc_(std::move(ccc)), side_(std::move(side_codes)) {}
  AuxRecord send(std::span<const Bit> payload, std::uint32_t main_state, const ChannelFamily& family,
                 RandomSource& encoder_rng, RandomSource& channel_rng) const override;
  BitVector receive(const AuxRecord& record, std::uint32_t main_state) const override;

 private:
  std::size_t blocks_for(std::size_t length) const;
  CompoundChannelCode ccc_;
  std::vector<PolarChannelCode> side_;
};

struct CompoundOptions {
  std::vector<std::size_t> multipliers;  // one per main channel, first = 1
  PolarParams params;
  ProfileOptions profile;
  DeriveOptions derive;
  AuxCodeOptions aux;
};

// Wiretap code over a compound main channel. With one main channel the
// result matches the single-channel construction exactly.
WiretapCode make_compound_wiretap_code(const SourceSpec& source, const ChannelFamily& family,
                                       const CompoundOptions& opt);

}  // namespace wiretap
