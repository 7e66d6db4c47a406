#include "wiretap/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "wiretap/info.hpp"

namespace wiretap {

namespace {

Eigen::MatrixXd joint_with(const SourceSpec& source, const Dmc& ch) {
  return source.q * ch.table;  // (u, y) = sum_x q(u,x) W(y|x)
}

std::size_t floor_nonneg(double v) { return v <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(v + 1e-9)); }

}  // namespace

double RateTerms::min_I_UY() const { return *std::min_element(I_UY.begin(), I_UY.end()); }
double RateTerms::max_I_UZ() const { return *std::max_element(I_UZ.begin(), I_UZ.end()); }
double RateTerms::min_H_UZ() const { return *std::min_element(H_UZ.begin(), H_UZ.end()); }

RateTerms rate_terms(const SourceSpec& source, const ChannelFamily& family) {
  source.validate();
  family.validate();
  RateTerms t;
  t.H_U = entropy(source.qu());
  Eigen::MatrixXd q = source.q;
  t.H_UX = conditional_entropy_rows_given_cols(q);
  t.I_UX = mutual_information(q);
  for (const auto& m : family.mains) {
    Eigen::MatrixXd j = joint_with(source, m);
    t.I_UY.push_back(mutual_information(j));
    t.H_UY.push_back(conditional_entropy_rows_given_cols(j));
  }
  std::vector<Dmc> eves = family.eves;
  if (family.best_eve_weights) eves.push_back(family.best_eve());
  for (const auto& e : eves) {
    Eigen::MatrixXd j = joint_with(source, e);
    t.I_UZ.push_back(mutual_information(j));
    t.H_UZ.push_back(conditional_entropy_rows_given_cols(j));
  }
  return t;
}

double theoretical_rate(const RateTerms& terms, double alpha) {
  return std::max(0.0, terms.min_I_UY() - alpha * terms.I_UX - (1.0 - alpha) * terms.max_I_UZ());
}

IndexSets construct_index_sets(const SourceSpec& source, const Dmc& main, const PolarParams& params,
                               const ProfileOptions& opt) {
  std::map<Role, EntropyProfile> profiles;
  for (Role role : {Role::U, Role::U_given_Y, Role::X, Role::X_given_U}) {
    ProfileOptions o = opt;
    o.seed = derive_seed(opt.seed, static_cast<std::uint64_t>(role));
    profiles[role] = entropy_profile(source, role == Role::U_given_Y ? &main : nullptr, role, params, o);
  }
  return build_index_sets(profiles, params);
}

double CodeConfig::achieved_rate() const {
  return static_cast<double>(total_message_bits()) / static_cast<double>(B * N());
}

std::size_t CodeConfig::tapped_per_block() const {
  return static_cast<std::size_t>(static_cast<std::int64_t>(N()) * alpha.num / alpha.den);
}

void CodeConfig::check() const {
  if (!is_power_of_two(K)) throw std::invalid_argument("K must be a power of two");
  if (L == 0 || B == 0 || pieces == 0) throw std::invalid_argument("L, B and the piece count must be positive");
  sets.check();
  if (sets.K != K) throw std::invalid_argument("index sets were built for a different K");
  if (static_cast<std::int64_t>(N()) * alpha.num % alpha.den != 0)
    throw std::invalid_argument("alpha*N is not an integer");
  if (r < L * e_len || r > hash_length())
    throw std::invalid_argument("r = " + std::to_string(r) + " outside [" + std::to_string(L * e_len) + ", " +
                                std::to_string(hash_length()) + "]");
  if (l_otp != L * B * e_prime_len + L * e_len) throw std::invalid_argument("l_OTP does not match the index sets");
  const std::size_t b0 = l_otp == 0 ? 0 : (l_key == 0 ? 0 : (l_otp + l_key - 1) / l_key);
  if (B0 < b0) throw std::invalid_argument("B0 is below ceil(l_OTP / l'_key)");
  if (hash_length() > 0 && hash_field.n != hash_length()) throw std::invalid_argument("hash field degree mismatch");
  if (init_field.n != N()) throw std::invalid_argument("init field degree mismatch");
}

CodeConfig derive_params(const IndexSets& sets, const PolarParams& params, const SourceSpec& source,
                         const ChannelFamily& family, const DeriveOptions& opt) {
  sets.check();
  if (sets.K != params.K) throw std::invalid_argument("index sets and parameters disagree on K");
  CodeConfig c;
  c.K = params.K;
  c.pieces = opt.pieces;
  c.L = opt.L;
  c.B = opt.B;
  c.alpha = opt.alpha;
  c.beta = params.beta;
  c.xi = opt.xi;
  c.backoff = opt.backoff;
  c.source = source;
  c.sets = sets;
  c.sample_mode = opt.sample_mode;
  if (c.L == 0 || c.B == 0 || c.pieces == 0) throw std::invalid_argument("L, B and the piece count must be positive");
  if (!(opt.xi > 0.0)) throw std::invalid_argument("xi must be positive");
  c.e_len = opt.e_length.value_or(sets.V_UY.size());
  c.e_prime_len = opt.e_prime_length.value_or(set_difference(sets.H_UY, sets.V_UY).size());
  c.terms = rate_terms(source, family);
  const double a = opt.alpha.value();
  c.rate_theoretical = theoretical_rate(c.terms, a);
  const double N = static_cast<double>(c.N());

  const std::size_t lo = c.L * c.e_len, hi = c.hash_length();
  if (lo > hi)
    throw std::invalid_argument("empty rate interval: L|V_UY| = " + std::to_string(lo) + " exceeds L|V_U| = " +
                                std::to_string(hi));
  const double r_real = N * ((1.0 - a) * c.terms.min_H_UZ() + a * c.terms.H_UX - opt.backoff);
  c.r_formula = floor_nonneg(r_real);
  if (opt.r_override) {
    c.r = *opt.r_override;
    if (c.r < lo || c.r > hi)
      throw std::invalid_argument("r override " + std::to_string(c.r) + " outside [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
  } else {
    if (r_real < static_cast<double>(lo))
      throw std::invalid_argument("secrecy budget N((1-a)min H(U|Z) + a H(U|X) - backoff) = " + std::to_string(r_real) +
                                  " is below the chaining overhead L|V_UY| = " + std::to_string(lo) +
                                  "; lower the backoff or enlarge K");
    c.r = std::min(c.r_formula, hi);
  }

  c.l_otp = c.L * c.B * c.e_prime_len + c.L * c.e_len;
  const double key_real =
      N * (c.terms.min_I_UY() - a * c.terms.I_UX - (1.0 - a) * c.terms.max_I_UZ() - opt.backoff - opt.xi);
  c.l_key = std::min(floor_nonneg(key_real), c.N());
  c.B0 = c.l_otp == 0 ? 0 : (c.l_key == 0 ? 0 : (c.l_otp + c.l_key - 1) / c.l_key);
  if (c.hash_length() > 0) c.hash_field = std_modulus(static_cast<unsigned>(c.hash_length()));
  c.init_field = std_modulus(static_cast<unsigned>(c.N()));
  c.check();
  return c;
}

// ---------------------------------------------------------------------------

PlainSideInfoCoder::PlainSideInfoCoder(const IndexSets& sets, const SourceSpec& source, const Dmc& main)
    : sets_(sets), residue_(set_difference(sets.H_UY, sets.V_UY)), law_(role_law(Role::U_given_Y, source, &main)) {}

std::pair<BitVector, BitVector> PlainSideInfoCoder::encode(std::span<const Bit> a) const {
  if (a.size() != sets_.K) throw std::invalid_argument("sub-block length mismatch");
  return {gather(a, sets_.V_UY), gather(a, residue_)};
}

BitVector PlainSideInfoCoder::decode(std::uint32_t main_state, std::span<const std::uint32_t> y,
                                     std::span<const Bit> e, std::span<const Bit> e_prime) const {
  if (main_state != 0) throw std::out_of_range("single-channel coder has only main state 0");
  if (e.size() != sets_.V_UY.size() || e_prime.size() != residue_.size())
    throw std::invalid_argument("side bits length mismatch");
  BitVector full(sets_.K, 0);
  scatter(full, sets_.V_UY, e);
  scatter(full, residue_, e_prime);
  KnownBits known{sets_.H_UY, gather(full, sets_.H_UY)};
  return sc_decode_si(y, known, sets_.H_UY, law_);
}

AuxRecord PolarAuxTransport::send(std::span<const Bit> payload, std::uint32_t main_state, const ChannelFamily& family,
                                  RandomSource&, RandomSource& channel_rng) const {
  AuxRecord rec;
  rec.length = payload.size();
  if (payload.empty()) return rec;
  const Dmc& ch = family.mains.at(main_state);
  for (const auto& cw : code_.encode_stream(payload)) rec.received.push_back(transmit_dmc(cw, ch, channel_rng));
  return rec;
}

BitVector PolarAuxTransport::receive(const AuxRecord& record, std::uint32_t) const {
  if (record.length == 0) return {};
  return code_.decode_stream(record.received, record.length);
}

PolarChannelCode design_aux_code(const Dmc& main, std::size_t K, const AuxCodeOptions& aux) {
  const BitLaw law = role_law(Role::X_given_Y, SourceSpec::uniform_identity(), &main);
  ProfileOptions opt;
  if (K <= 8 && main.outputs() <= 4) {
    opt.mode = ProfileMode::exact;
  } else {
    opt = {ProfileMode::monte_carlo, aux.samples, aux.seed, aux.threads, aux.store};
  }
  const auto profile = entropy_profile(law, K, opt);
  const double capacity = 1.0 - profile.mean();
  // at least one information bit per codeword
  const double rate = std::max(aux.rate_fraction * capacity, 1.0 / static_cast<double>(K));
  return PolarChannelCode::build(main, profile, std::min(rate, capacity));
}

WiretapCode make_wiretap_code(CodeConfig config, const ChannelFamily& family, const AuxCodeOptions& aux) {
  config.check();
  if (family.mains.size() != 1) throw std::invalid_argument("single-channel code needs exactly one main channel");
  if (config.pieces != 1) throw std::invalid_argument("single-channel code uses one polar block per sub-block");
  WiretapCode code;
  auto coder = std::make_shared<PlainSideInfoCoder>(config.sets, config.source, family.mains[0]);
  if (coder->e_length() != config.e_len || coder->e_prime_length() != config.e_prime_len)
    throw std::invalid_argument("coder lengths disagree with the configuration");
  code.coder = coder;
  code.aux = std::make_shared<PolarAuxTransport>(design_aux_code(family.mains[0], config.K, aux));
  code.config = std::move(config);
  return code;
}

// ---------------------------------------------------------------------------

StateSequence Exposure::states(std::size_t n, std::size_t eve_count, RandomSource& rng) const {
  switch (eve_states) {
    case EveStates::constant:
      return StateSequence::constant(n, main_state, eve_state);
    case EveStates::alternating:
      return StateSequence::alternating_eve(n, main_state, eve_count);
    case EveStates::iid:
      return StateSequence::iid(n, main_state, eve_weights, rng);
  }
  throw std::logic_error("unknown eavesdropper state generator");
}

SubBlock generate_subblock(const CodeConfig& c, std::span<const Bit> t_bits, RandomSource& rng) {
  const auto& s = c.sets;
  const std::size_t K = c.K;
  if (t_bits.size() != c.pieces * s.V_U.size()) throw std::invalid_argument("sub-block payload length mismatch");
  const BitLaw law_u = role_law(Role::U, c.source, nullptr);
  const BitLaw law_xu = role_law(Role::X_given_U, c.source, nullptr);
  IndexSet all(K);
  std::iota(all.begin(), all.end(), 0);
  const IndexSet low_entropy = set_difference(all, s.H_U);
  const std::vector<std::uint32_t> none(K, 0);
  SubBlock out;
  for (std::size_t p = 0; p < c.pieces; ++p) {
    KnownBits frozen{s.V_U, slice(t_bits, p * s.V_U.size(), s.V_U.size())};
    BitVector a = sc_sample(frozen, none, law_u, c.sample_mode, low_entropy, rng);
    BitVector u = transform(a);
    KnownBits uniform{s.V_XU, rng.uniform_bits(s.V_XU.size())};
    std::vector<std::uint32_t> obs(u.begin(), u.end());
    BitVector v = sc_sample(uniform, obs, law_xu, SampleMode::random, {}, rng);
    BitVector x = transform(v);
    append(out.a, a);
    append(out.u, u);
    append(out.v, v);
    append(out.x, x);
  }
  return out;
}

BitVector derive_key(const CodeConfig& c, std::span<const Bit> r_init, std::span<const Bit> u) {
  return uh_hash(FieldElem::from_bits(r_init), FieldElem::from_bits(u), c.l_key, c.init_field);
}

namespace {

// Generates L sub-blocks from a T of L*pieces*|V_U| bits, transmits them and
// fills the shared fields of the block record.
void fill_block(const WiretapCode& code, std::span<const Bit> t, const ChannelFamily& family, const Exposure& exposure,
                SessionRng rng, BlockRecord& rec) {
  const auto& c = code.config;
  const std::size_t per = c.pieces * c.sets.V_U.size();
  for (std::size_t l = 0; l < c.L; ++l) {
    auto sb = generate_subblock(c, t.subspan(l * per, per), rng.encoder);
    append(rec.a, sb.a);
    append(rec.u, sb.u);
    append(rec.v, sb.v);
    append(rec.x, sb.x);
    auto [e, ep] = code.coder->encode(sb.a);
    append(rec.e, e);
    append(rec.e_prime, ep);
  }
  const std::size_t n = c.N();
  auto states = exposure.states(n, family.eves.size(), rng.channel);
  rec.tap = choose_tap(exposure.tap, c.alpha, n, rng.channel, exposure.custom_tap);
  rec.tap_values = gather(rec.x, rec.tap);
  auto out = transmit(rec.x, states, family, rng.channel);
  rec.y = std::move(out.y);
  rec.z = std::move(out.z);
  rec.eve_states = std::move(states.s);
}

std::vector<Symbols> split_y(const Symbols& y, std::size_t L, std::size_t len) {
  std::vector<Symbols> out;
  for (std::size_t l = 0; l < L; ++l)
    out.emplace_back(y.begin() + static_cast<long>(l * len), y.begin() + static_cast<long>((l + 1) * len));
  return out;
}

}  // namespace

BlockRecord init_transmission(const WiretapCode& code, const ChannelFamily& family, const Exposure& exposure,
                              SessionRng rng) {
  const auto& c = code.config;
  const std::size_t per = c.pieces * c.sets.V_U.size();
  BlockRecord rec;
  BitVector t;
  for (std::size_t l = 0; l < c.L; ++l) append(t, rng.encoder.uniform_bits(per));
  fill_block(code, t, family, exposure, rng, rec);
  return rec;
}

BlockRecord init_block(const WiretapCode& code, const ChannelFamily& family, const Exposure& exposure, SessionRng rng) {
  const auto& c = code.config;
  BlockRecord rec = init_transmission(code, family, exposure, rng);
  rec.r_prime = rng.encoder.uniform_bits(c.L * c.e_prime_len);
  rec.r = rng.encoder.uniform_nonzero_bits(c.N());
  return rec;
}

InitResult init_phase(const WiretapCode& code, const ChannelFamily& family, const Exposure& exposure, SessionRng rng) {
  const auto& c = code.config;
  if (c.l_otp > 0 && c.B0 == 0)
    throw std::invalid_argument("initialization impossible: l'_key = 0 (secret-key rate is not positive)");
  InitResult res;
  res.transcript.main_state = exposure.main_state;
  const std::size_t sub = c.subblock_length();
  for (std::size_t b = 0; b < c.B0; ++b) {
    BlockRecord rec = init_block(code, family, exposure, rng);
    BitVector d;
    for (std::size_t l = 0; l < c.L; ++l) {
      auto ep = slice(rec.e_prime, l * c.e_prime_len, c.e_prime_len);
      append(d, xor_bits(ep, slice(rec.r_prime, l * c.e_prime_len, c.e_prime_len)));
      append(d, slice(rec.e, l * c.e_len, c.e_len));
    }
    res.transcript.d_aux.push_back(code.aux->send(d, exposure.main_state, family, rng.encoder, rng.channel));
    res.transcript.d.push_back(std::move(d));
    append(res.transmitter.bits, derive_key(c, rec.r, rec.u));

    // receiver
    const BitVector d_hat = code.aux->receive(res.transcript.d_aux.back(), exposure.main_state);
    const auto ys = split_y(rec.y, c.L, sub);
    BitVector u_hat;
    const std::size_t stride = c.e_prime_len + c.e_len;
    for (std::size_t l = 0; l < c.L; ++l) {
      auto ep = xor_bits(slice(d_hat, l * stride, c.e_prime_len), slice(rec.r_prime, l * c.e_prime_len, c.e_prime_len));
      auto e = slice(d_hat, l * stride + c.e_prime_len, c.e_len);
      BitVector a_hat = code.coder->decode(exposure.main_state, ys[l], e, ep);
      for (std::size_t p = 0; p < c.pieces; ++p) append(u_hat, transform(slice(a_hat, p * c.K, c.K)));
    }
    append(res.receiver.bits, derive_key(c, rec.r, u_hat));
    res.transcript.blocks.push_back(std::move(rec));
  }
  res.transmitter.bits.resize(c.l_otp);
  res.receiver.bits.resize(c.l_otp);
  res.transmitter.provenance = res.receiver.provenance = "init_phase";
  return res;
}

std::vector<BitVector> draw_messages(const CodeConfig& c, RandomSource& rng) {
  std::vector<BitVector> m;
  for (std::size_t b = 0; b < c.B; ++b) m.push_back(rng.uniform_bits(c.message_length(b)));
  return m;
}

BlockRecord encode_block(const WiretapCode& code, std::span<const Bit> message, std::span<const Bit> m_prime,
                         const ChannelFamily& family, const Exposure& exposure, SessionRng rng) {
  const auto& c = code.config;
  BlockRecord rec;
  rec.r_prime = rng.encoder.uniform_bits(c.randomizer_length());
  const std::size_t n = c.hash_length();
  if (n > 0) {
    rec.r = rng.encoder.uniform_nonzero_bits(n);
    const BitVector payload = concat({message, m_prime, rec.r_prime});
    rec.t = hash_preimage(FieldElem::from_bits(rec.r), payload, c.hash_field).bits();
  }
  fill_block(code, rec.t, family, exposure, rng, rec);
  return rec;
}

SessionTranscript encode_session(const WiretapCode& code, const std::vector<BitVector>& messages,
                                 const KeyMaterial& key, const ChannelFamily& family, const Exposure& exposure,
                                 SessionRng rng) {
  const auto& c = code.config;
  if (messages.size() != c.B) throw std::invalid_argument("expected one message per block");
  for (std::size_t b = 0; b < c.B; ++b)
    if (messages[b].size() != c.message_length(b))
      throw std::invalid_argument("message " + std::to_string(b + 1) + " has length " +
                                  std::to_string(messages[b].size()) + ", expected " +
                                  std::to_string(c.message_length(b)));
  if (key.bits.size() != c.l_otp)
    throw std::invalid_argument("key length " + std::to_string(key.bits.size()) + " != l_OTP " +
                                std::to_string(c.l_otp));
  SessionTranscript tr;
  tr.main_state = exposure.main_state;
  BitVector m_prime;
  for (std::size_t b = 0; b < c.B; ++b) {
    tr.blocks.push_back(encode_block(code, messages[b], m_prime, family, exposure, rng));
    m_prime = tr.blocks.back().e;
  }
  BitVector plain;
  for (const auto& blk : tr.blocks) append(plain, blk.e_prime);
  append(plain, tr.blocks.back().e);
  tr.otp_ciphertext = xor_bits(plain, key.bits);
  tr.otp_aux = code.aux->send(tr.otp_ciphertext, exposure.main_state, family, rng.encoder, rng.channel);
  return tr;
}

ReceiverView receiver_view(const SessionTranscript& tr) {
  ReceiverView v;
  v.main_state = tr.main_state;
  for (const auto& b : tr.blocks) {
    v.y.push_back(b.y);
    v.r.push_back(b.r);
  }
  v.otp_aux = tr.otp_aux;
  return v;
}

std::vector<BitVector> decode_session(const WiretapCode& code, const ReceiverView& view, const KeyMaterial& key) {
  const auto& c = code.config;
  if (view.y.size() != c.B || view.r.size() != c.B) throw std::invalid_argument("receiver view has the wrong block count");
  if (key.bits.size() != c.l_otp) throw std::invalid_argument("key length does not match l_OTP");
  const BitVector plain = xor_bits(code.aux->receive(view.otp_aux, view.main_state), key.bits);
  const std::size_t ep_block = c.L * c.e_prime_len;
  BitVector e = slice(plain, c.B * ep_block, c.L * c.e_len);  // E of the last block
  const std::size_t sub = c.subblock_length();
  std::vector<BitVector> out(c.B);
  for (std::size_t b = c.B; b-- > 0;) {
    const BitVector ep = slice(plain, b * ep_block, ep_block);
    const auto ys = split_y(view.y[b], c.L, sub);
    BitVector t_hat;
    for (std::size_t l = 0; l < c.L; ++l) {
      BitVector a = code.coder->decode(view.main_state, ys[l], slice(e, l * c.e_len, c.e_len),
                                       slice(ep, l * c.e_prime_len, c.e_prime_len));
      for (std::size_t p = 0; p < c.pieces; ++p) append(t_hat, gather(slice(a, p * c.K, c.K), c.sets.V_U));
    }
    const std::size_t mlen = c.message_length(b);
    if (c.hash_length() == 0) {
      e.clear();
      continue;
    }
    const BitVector p = gf_mul(FieldElem::from_bits(view.r[b]), FieldElem::from_bits(t_hat), c.hash_field).bits();
    out[b] = slice(p, 0, mlen);
    e = slice(p, mlen, b == 0 ? 0 : c.L * c.e_len);
  }
  return out;
}

}  // namespace wiretap
