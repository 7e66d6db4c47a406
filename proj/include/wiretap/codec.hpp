#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wiretap/bits.hpp"
#include "wiretap/channel.hpp"
#include "wiretap/galois.hpp"
#include "wiretap/polar.hpp"
#include "wiretap/random.hpp"

namespace wiretap {

// Single-letter information quantities of q(u,x) against the channel family.
struct RateTerms {
  double H_U = 0, H_UX = 0, I_UX = 0;
  std::vector<double> I_UY, H_UY;  // per main state
  std::vector<double> I_UZ, H_UZ;  // per eve state, then the declared best channel if any
  double min_I_UY() const;
  double max_I_UZ() const;
  double min_H_UZ() const;
};
RateTerms rate_terms(const SourceSpec& source, const ChannelFamily& family);
// [min_t I(U;Y_t) - a I(U;X) - (1-a) max_s I(U;Z_s)]^+
double theoretical_rate(const RateTerms& terms, double alpha);

// Profiles for U, U|Y, X and X|U, then the repaired sets. Exact enumeration
// is used when opt.mode == exact.
IndexSets construct_index_sets(const SourceSpec& source, const Dmc& main, const PolarParams& params,
                               const ProfileOptions& opt);

struct DeriveOptions {
  std::size_t L = 1;
  std::size_t B = 1;
  Fraction alpha;
  double xi = 1e-3;
  double backoff = 0.0;
  // polar blocks per sub-block (product of the compound multipliers)
  std::size_t pieces = 1;
  // per sub-block lengths of the chained part E and the padded residue E';
  // default to |V_UY| and |H_UY \ V_UY|
  std::optional<std::size_t> e_length, e_prime_length;
  std::optional<std::size_t> r_override;
  SampleMode sample_mode = SampleMode::random;
};

struct CodeConfig {
  std::size_t K = 0;  // polar block length
  std::size_t pieces = 1;
  std::size_t L = 1, B = 1, B0 = 0;
  Fraction alpha;
  double beta = 0, xi = 0, backoff = 0;
  SourceSpec source;
  IndexSets sets;
  SampleMode sample_mode = SampleMode::random;
  std::size_t e_len = 0, e_prime_len = 0;
  std::size_t r = 0;
  std::size_t r_formula = 0;  // value of the finite-length formula before clamping
  std::size_t l_key = 0;      // per init block
  std::size_t l_otp = 0;
  FieldSpec hash_field, init_field;
  RateTerms terms;
  double rate_theoretical = 0;

  std::size_t subblock_length() const { return K * pieces; }
  std::size_t N() const { return K * pieces * L; }
  std::size_t hash_length() const { return L * pieces * sets.V_U.size(); }
  std::size_t message_length(std::size_t b) const { return b == 0 ? r : r - L * e_len; }  // b is 0-based
  std::size_t randomizer_length() const { return hash_length() - r; }
  std::size_t total_message_bits() const { return B * r - (B - 1) * L * e_len; }
  double achieved_rate() const;
  std::size_t tapped_per_block() const;
  // Recomputes every derived length and throws on any mismatch.
  void check() const;
};

CodeConfig derive_params(const IndexSets& sets, const PolarParams& params, const SourceSpec& source,
                         const ChannelFamily& family, const DeriveOptions& opt);

// ---------------------------------------------------------------------------
// Source coding with side information for one sub-block.
class SideInfoCoder {
 public:
  virtual ~SideInfoCoder() = default;
  virtual std::size_t e_length() const = 0;
  virtual std::size_t e_prime_length() const = 0;
  // a: polarized sub-block, pieces concatenated. Returns (E, E').
  virtual std::pair<BitVector, BitVector> encode(std::span<const Bit> a) const = 0;
  virtual BitVector decode(std::uint32_t main_state, std::span<const std::uint32_t> y, std::span<const Bit> e,
                           std::span<const Bit> e_prime) const = 0;
};

// E = A[V_UY], E' = A[H_UY \ V_UY], SC decoding with those bits known.
class PlainSideInfoCoder final : public SideInfoCoder {
 public:
  PlainSideInfoCoder(const IndexSets& sets, const SourceSpec& source, const Dmc& main);
  std::size_t e_length() const override { return sets_.V_UY.size(); }
  std::size_t e_prime_length() const override { return residue_.size(); }
  std::pair<BitVector, BitVector> encode(std::span<const Bit> a) const override;
  BitVector decode(std::uint32_t main_state, std::span<const std::uint32_t> y, std::span<const Bit> e,
                   std::span<const Bit> e_prime) const override;

 private:
  IndexSets sets_;
  IndexSet residue_;
  BitLaw law_;
};

struct AuxRecord {
  std::size_t length = 0;
  std::vector<Symbols> received;
};

// Reliable (non-secret) side transmissions: D_b and the OTP ciphertext.
class AuxTransport {
 public:
  virtual ~AuxTransport() = default;
  virtual AuxRecord send(std::span<const Bit> payload, std::uint32_t main_state, const ChannelFamily& family,
                         RandomSource& encoder_rng, RandomSource& channel_rng) const = 0;
  virtual BitVector receive(const AuxRecord& record, std::uint32_t main_state) const = 0;
};

class PolarAuxTransport final : public AuxTransport {
 public:
  explicit PolarAuxTransport(PolarChannelCode code) : code_(std::move(code)) {}
  AuxRecord send(std::span<const Bit> payload, std::uint32_t main_state, const ChannelFamily& family,
                 RandomSource& encoder_rng, RandomSource& channel_rng) const override;
  BitVector receive(const AuxRecord& record, std::uint32_t main_state) const override;
  const PolarChannelCode& code() const { return code_; }

 private:
  PolarChannelCode code_;
};

struct WiretapCode {
  CodeConfig config;
  std::shared_ptr<const SideInfoCoder> coder;
  std::shared_ptr<const AuxTransport> aux;
};

struct AuxCodeOptions {
  double rate_fraction = 0.5;  // aux code rate as a fraction of the estimated capacity
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  const ProfileStore* store = nullptr;
};

// Single main channel (|T| = 1).
WiretapCode make_wiretap_code(CodeConfig config, const ChannelFamily& family, const AuxCodeOptions& aux);
PolarChannelCode design_aux_code(const Dmc& main, std::size_t K, const AuxCodeOptions& aux);

// ---------------------------------------------------------------------------
// How the channel is used in a session: main state, eavesdropper states and taps.
struct Exposure {
  enum class EveStates { constant, alternating, iid };
  std::uint32_t main_state = 0;
  EveStates eve_states = EveStates::constant;
  std::uint32_t eve_state = 0;
  std::vector<double> eve_weights;
  TapStrategy tap = TapStrategy::first;
  IndexSet custom_tap;
  StateSequence states(std::size_t n, std::size_t eve_count, RandomSource& rng) const;
};

struct BlockRecord {
  BitVector t;        // hash preimage T_b (session blocks only)
  BitVector a, u, v, x;
  Symbols y, z;
  std::vector<std::uint32_t> eve_states;
  IndexSet tap;
  BitVector tap_values;
  BitVector r, r_prime;  // R_b, R'_b or R^init_b, R^init'_b
  BitVector e, e_prime;  // coder outputs, sub-blocks concatenated
};

struct SessionTranscript {
  std::uint32_t main_state = 0;
  std::vector<BlockRecord> blocks;
  BitVector otp_ciphertext;
  AuxRecord otp_aux;
};

struct InitTranscript {
  std::uint32_t main_state = 0;
  std::vector<BlockRecord> blocks;
  std::vector<BitVector> d;
  std::vector<AuxRecord> d_aux;
};

struct KeyMaterial {
  BitVector bits;
  std::string provenance;
};

struct InitResult {
  KeyMaterial transmitter, receiver;
  InitTranscript transcript;
  bool agreed() const { return transmitter.bits == receiver.bits; }
};

// What the encoder needs from its randomness: encoder coins and channel noise.
struct SessionRng {
  RandomSource& encoder;
  RandomSource& channel;
};

struct SubBlock {
  BitVector a, u, v, x;
};

// V_U bits of each piece come from t_bits; everything else is SC sampled.
SubBlock generate_subblock(const CodeConfig& config, std::span<const Bit> t_bits, RandomSource& rng);

// Leftmost l_key bits of r_init * u in GF(2^N).
BitVector derive_key(const CodeConfig& config, std::span<const Bit> r_init, std::span<const Bit> u);

// Transmission part of an initialization block: uniform T, then the sub-blocks.
BlockRecord init_transmission(const WiretapCode& code, const ChannelFamily& family, const Exposure& exposure,
                              SessionRng rng);
// One initialization block: the transmission, then R^init and R^init'.
BlockRecord init_block(const WiretapCode& code, const ChannelFamily& family, const Exposure& exposure, SessionRng rng);

InitResult init_phase(const WiretapCode& code, const ChannelFamily& family, const Exposure& exposure,
                      SessionRng rng);

// Draws the messages M_1..M_B with the proper lengths.
std::vector<BitVector> draw_messages(const CodeConfig& config, RandomSource& rng);

SessionTranscript encode_session(const WiretapCode& code, const std::vector<BitVector>& messages,
                                 const KeyMaterial& key, const ChannelFamily& family, const Exposure& exposure,
                                 SessionRng rng);

// Everything the legitimate receiver sees of a session; no R'_b, no eavesdropper data.
struct ReceiverView {
  std::uint32_t main_state = 0;
  std::vector<Symbols> y;
  std::vector<BitVector> r;
  AuxRecord otp_aux;
};
ReceiverView receiver_view(const SessionTranscript& transcript);

std::vector<BitVector> decode_session(const WiretapCode& code, const ReceiverView& view, const KeyMaterial& key);

// One block of the secure-communication encoder given its inputs; used by the
// session encoder and by the exact leakage enumeration.
BlockRecord encode_block(const WiretapCode& code, std::span<const Bit> message, std::span<const Bit> m_prime,
                         const ChannelFamily& family, const Exposure& exposure, SessionRng rng);

}  // namespace wiretap
