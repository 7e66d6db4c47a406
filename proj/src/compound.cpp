#include "wiretap/compound.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace wiretap {

std::size_t CompoundSpec::T(std::size_t j) const {
  std::size_t t = 1;
  for (std::size_t i = 0; i < j; ++i) t *= multipliers.at(i);
  return t;
}

std::size_t CompoundSpec::f_length(std::size_t level) const { return T(level) * Vj.at(level).size(); }

std::size_t CompoundSpec::e_length(std::size_t level) const {
  if (level == 0 || level > J()) throw std::out_of_range("css level out of range");
  std::size_t e = Vj[0].size();
  for (std::size_t j = 1; j < level; ++j) {
    const std::size_t f = f_length(j);
    e = e + (multipliers[j] - 1) * std::max(e, f) + f;
  }
  return e;
}

std::size_t CompoundSpec::e_prime_length() const {
  std::size_t n = 0;
  for (std::size_t j = 1; j <= J(); ++j) n += pieces() * residue_length(j);
  return n;
}

void CompoundSpec::validate() const {
  if (!is_power_of_two(K)) throw std::invalid_argument("css: K must be a power of two");
  if (J() == 0) throw std::invalid_argument("css: at least one decoder is required");
  if (multipliers[0] != 1) throw std::invalid_argument("css: the first multiplier must be 1");
  for (auto t : multipliers)
    if (t == 0) throw std::invalid_argument("css: multipliers must be positive");
  if (H.size() != J() || Vj.size() != J() || laws.size() != J())
    throw std::invalid_argument("css: need one H, V and law per decoder");
  for (std::size_t j = 0; j < J(); ++j) {
    if (!is_subset(Vj[j], H[j])) throw std::invalid_argument("css: V_j must be inside H_j");
    if (!is_subset(Vj[j], V)) throw std::invalid_argument("css: V_j must be inside V");
    if (!H[j].empty() && H[j].back() >= K) throw std::invalid_argument("css: index out of range");
  }
}

namespace {

BitVector xor_padded(std::span<const Bit> a, std::span<const Bit> b) {
  BitVector out(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] ^= b[i];
  return out;
}

// f^{(level)}: V_{level+1} bits of each of the T_level pieces.
BitVector f_rec(const CompoundSpec& s, std::size_t level, std::span<const Bit> a) {
  BitVector out;
  const auto& v = s.Vj[level];
  for (std::size_t p = 0; p < s.T(level); ++p) append(out, gather(a.subspan(p * s.K, s.K), v));
  return out;
}

BitVector e_rec(const CompoundSpec& s, std::size_t level, std::span<const Bit> a) {
  if (level == 1) return gather(a.subspan(0, s.K), s.Vj[0]);
  const std::size_t sub = s.T(level - 1) * s.K;
  const std::size_t t = s.multipliers[level - 1];
  BitVector out = e_rec(s, level - 1, a.subspan(0, sub));
  for (std::size_t i = 1; i < t; ++i)
    append(out, xor_padded(e_rec(s, level - 1, a.subspan(i * sub, sub)), f_rec(s, level - 1, a.subspan((i - 1) * sub, sub))));
  append(out, f_rec(s, level - 1, a.subspan((t - 1) * sub, sub)));
  return out;
}

struct Decoder {
  const CompoundSpec& s;
  std::size_t j0;
  std::span<const std::uint32_t> y;
  BitVector residue_bits;  // E'_{j0}
  IndexSet residue;
  BitVector out;

  void piece(std::size_t p, std::span<const Bit> v_bits) {
    const std::size_t K = s.K;
    const auto& v = s.Vj[j0 - 1];
    const auto& h = s.H[j0 - 1];
    BitVector full(K, 0);
    scatter(full, v, v_bits);
    scatter(full, residue, slice(residue_bits, p * residue.size(), residue.size()));
    KnownBits known{h, gather(full, h)};
    BitVector a = sc_decode_si(y.subspan(p * K, K), known, h, s.laws[j0 - 1]);
    std::copy(a.begin(), a.end(), out.begin() + static_cast<long>(p * K));
  }

  std::span<const Bit> block(std::size_t first, std::size_t level) const {
    return std::span<const Bit>(out).subspan(first * s.K, s.T(level) * s.K);
  }

  // Decodes pieces [first, first + T_level) from e^{(level)} of those pieces.
  void level(std::size_t lv, std::size_t first, std::span<const Bit> e) {
    if (lv == 1) {
      piece(first, e);
      return;
    }
    const std::size_t t = s.multipliers[lv - 1];
    const std::size_t sub = s.T(lv - 1);
    const std::size_t le = s.e_length(lv - 1), lf = s.f_length(lv - 1), seg = std::max(le, lf);
    auto segment = [&](std::size_t i) { return e.subspan(le + (i - 1) * seg, seg); };  // e(U_{i+1}) + f(U_i)
    if (j0 == lv) {
      // reverse: each block's f^{(lv-1)} holds V_{lv} of every piece
      BitVector f = slice(e, le + (t - 1) * seg, lf);
      const std::size_t nv = s.Vj[lv - 1].size();
      for (std::size_t i = t; i-- > 0;) {
        for (std::size_t p = 0; p < sub; ++p) piece(first + i * sub + p, slice(f, p * nv, nv));
        if (i == 0) break;
        const BitVector eh = e_rec(s, lv - 1, block(first + i * sub, lv - 1));
        f = slice(xor_padded(segment(i), eh), 0, lf);
      }
      return;
    }
    BitVector cur = slice(e, 0, le);
    for (std::size_t i = 0; i < t; ++i) {
      level(lv - 1, first + i * sub, cur);
      if (i + 1 == t) break;
      const BitVector fh = f_rec(s, lv - 1, block(first + i * sub, lv - 1));
      cur = slice(xor_padded(segment(i + 1), fh), 0, le);
    }
  }
};

}  // namespace

ChainedCode css_encode_polar(std::span<const Bit> a, const CompoundSpec& s) {
  if (a.size() != s.length()) throw std::invalid_argument("css: input length mismatch");
  ChainedCode c;
  c.E = e_rec(s, s.J(), a);
  for (std::size_t j = 1; j <= s.J(); ++j) {
    const IndexSet res = set_difference(s.H[j - 1], s.Vj[j - 1]);
    for (std::size_t p = 0; p < s.pieces(); ++p) append(c.E_prime, gather(a.subspan(p * s.K, s.K), res));
  }
  return c;
}

ChainedCode css_encode(std::span<const Bit> u, const CompoundSpec& s) {
  if (u.size() != s.length()) throw std::invalid_argument("css: input length mismatch");
  BitVector a;
  for (std::size_t p = 0; p < s.pieces(); ++p) append(a, transform(u.subspan(p * s.K, s.K)));
  return css_encode_polar(a, s);
}

BitVector css_decode_polar(std::size_t j0, std::span<const std::uint32_t> y, std::span<const Bit> E,
                           std::span<const Bit> E_prime, const CompoundSpec& s) {
  if (j0 == 0 || j0 > s.J()) throw std::out_of_range("css: decoder index must be in 1..J");
  if (y.size() != s.length()) throw std::invalid_argument("css: observation length mismatch");
  if (E.size() != s.e_length() || E_prime.size() != s.e_prime_length())
    throw std::invalid_argument("css: side bits length mismatch");
  std::size_t off = 0;
  for (std::size_t j = 1; j < j0; ++j) off += s.pieces() * s.residue_length(j);
  Decoder d{s, j0, y, slice(E_prime, off, s.pieces() * s.residue_length(j0)),
            set_difference(s.H[j0 - 1], s.Vj[j0 - 1]), BitVector(s.length(), 0)};
  d.level(s.J(), 0, E);
  return d.out;
}

BitVector css_decode(std::size_t j0, std::span<const std::uint32_t> y, std::span<const Bit> E,
                     std::span<const Bit> E_prime, const CompoundSpec& s) {
  BitVector a = css_decode_polar(j0, y, E, E_prime, s);
  BitVector u;
  for (std::size_t p = 0; p < s.pieces(); ++p) append(u, transform(slice(a, p * s.K, s.K)));
  return u;
}

std::vector<std::size_t> euclid_split(std::size_t total, std::size_t parts) {
  if (parts == 0) throw std::invalid_argument("split into zero parts");
  const std::size_t q = total / parts, r = total % parts;
  std::vector<std::size_t> out(parts, q);
  for (std::size_t i = 0; i < r; ++i) ++out[i];
  return out;
}

// ---------------------------------------------------------------------------

CompoundChannelCode CompoundChannelCode::from_spec(CompoundSpec spec) {
  spec.validate();
  CompoundChannelCode c;
  const std::size_t n = spec.pieces();
  for (auto sz : euclid_split(spec.e_length(), n)) {
    if (sz > spec.K) throw std::invalid_argument("ccc: chained part does not fit in one block per piece");
    IndexSet a(sz);
    std::iota(a.begin(), a.end(), 0);
    c.A_.push_back(std::move(a));
  }
  c.spec_ = std::move(spec);
  return c;
}

CompoundChannelCode CompoundChannelCode::build(const std::vector<Dmc>& mains, std::size_t K,
                                               std::vector<std::size_t> multipliers, double beta,
                                               const ProfileOptions& opt) {
  if (mains.size() != multipliers.size()) throw std::invalid_argument("ccc: one multiplier per main channel");
  const PolarParams params = PolarParams::make(K, beta);
  const double d = params.delta();
  CompoundSpec s;
  s.K = K;
  s.multipliers = std::move(multipliers);
  s.V.resize(K);
  std::iota(s.V.begin(), s.V.end(), 0);
  const SourceSpec uniform = SourceSpec::uniform_identity();
  for (std::size_t j = 0; j < mains.size(); ++j) {
    ProfileOptions o = opt;
    o.seed = derive_seed(opt.seed, 200 + j);
    const auto prof = entropy_profile(uniform, &mains[j], Role::X_given_Y, params, o);
    IndexSet v = threshold_set(prof, 1.0 - d);
    s.H.push_back(set_union(threshold_set(prof, d), v));
    s.Vj.push_back(std::move(v));
    s.laws.push_back(role_law(Role::X_given_Y, uniform, &mains[j]));
  }
  return from_spec(std::move(s));
}

std::size_t CompoundChannelCode::message_length() const {
  std::size_t n = 0;
  for (std::size_t t = 0; t < A_.size(); ++t) n += piece_message_length(t);
  return n;
}

CccEncoded CompoundChannelCode::encode(const std::vector<BitVector>& messages, RandomSource& rng) const {
  const auto& s = spec_;
  const std::size_t K = s.K, n = s.pieces();
  CccEncoded out;
  BitVector e = rng.uniform_bits(s.e_length());  // E_0
  for (const auto& m : messages) {
    if (m.size() != message_length()) throw std::invalid_argument("ccc: message length mismatch");
    BitVector v;
    std::size_t mo = 0, eo = 0;
    for (std::size_t t = 0; t < n; ++t) {
      BitVector piece(K, 0);
      const std::size_t na = A_[t].size(), nm = K - na;
      scatter(piece, A_[t], slice(e, eo, na));
      IndexSet rest(nm);
      std::iota(rest.begin(), rest.end(), na);
      scatter(piece, rest, slice(m, mo, nm));
      eo += na;
      mo += nm;
      out.codewords.push_back(transform(piece));
      append(v, piece);
    }
    auto c = css_encode_polar(v, s);
    e = std::move(c.E);
    out.e_prime.push_back(std::move(c.E_prime));
  }
  out.e_last = e;
  return out;
}

std::vector<BitVector> CompoundChannelCode::decode(std::size_t j, const std::vector<Symbols>& y,
                                                   std::span<const Bit> e_last,
                                                   const std::vector<BitVector>& e_prime) const {
  const auto& s = spec_;
  const std::size_t n = s.pieces(), B = e_prime.size();
  if (y.size() != B * n) throw std::invalid_argument("ccc: codeword count mismatch");
  std::vector<BitVector> out(B);
  BitVector e(e_last.begin(), e_last.end());
  for (std::size_t b = B; b-- > 0;) {
    Symbols yb;
    for (std::size_t t = 0; t < n; ++t) yb.insert(yb.end(), y[b * n + t].begin(), y[b * n + t].end());
    BitVector v = css_decode_polar(j, yb, e, e_prime[b], s);
    e.clear();
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t na = A_[t].size();
      auto piece = std::span<const Bit>(v).subspan(t * s.K, s.K);
      append(e, piece.subspan(0, na));
      append(out[b], piece.subspan(na));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::pair<BitVector, BitVector> CompoundSideInfoCoder::encode(std::span<const Bit> a) const {
  auto c = css_encode_polar(a, spec_);
  return {std::move(c.E), std::move(c.E_prime)};
}

BitVector CompoundSideInfoCoder::decode(std::uint32_t main_state, std::span<const std::uint32_t> y,
                                        std::span<const Bit> e, std::span<const Bit> e_prime) const {
  if (main_state >= spec_.J()) throw std::out_of_range("main state has no decoder");
  return css_decode_polar(main_state + 1, y, e, e_prime, spec_);
}

std::size_t CompoundAuxTransport::blocks_for(std::size_t length) const {
  const std::size_t ml = ccc_.message_length();
  if (ml == 0) throw std::invalid_argument("compound aux code carries no message bits");
  return (length + ml - 1) / ml;
}

AuxRecord CompoundAuxTransport::send(std::span<const Bit> payload, std::uint32_t main_state,
                                     const ChannelFamily& family, RandomSource& encoder_rng,
                                     RandomSource& channel_rng) const {
  AuxRecord rec;
  rec.length = payload.size();
  if (payload.empty()) return rec;
  const Dmc& ch = family.mains.at(main_state);
  const std::size_t B = blocks_for(payload.size()), ml = ccc_.message_length();
  BitVector padded(payload.begin(), payload.end());
  padded.resize(B * ml, 0);
  std::vector<BitVector> msgs;
  for (std::size_t b = 0; b < B; ++b) msgs.push_back(slice(padded, b * ml, ml));
  const auto enc = ccc_.encode(msgs, encoder_rng);
  for (const auto& cw : enc.codewords) rec.received.push_back(transmit_dmc(cw, ch, channel_rng));
  BitVector side;
  for (const auto& ep : enc.e_prime) append(side, ep);
  append(side, enc.e_last);
  for (const auto& code : side_)
    for (const auto& cw : code.encode_stream(side)) rec.received.push_back(transmit_dmc(cw, ch, channel_rng));
  return rec;
}

BitVector CompoundAuxTransport::receive(const AuxRecord& record, std::uint32_t main_state) const {
  if (record.length == 0) return {};
  const auto& s = ccc_.spec();
  const std::size_t B = blocks_for(record.length), n = s.pieces();
  const std::size_t side_len = B * s.e_prime_length() + s.e_length();
  std::size_t off = B * n;
  for (std::size_t j = 0; j < main_state; ++j) off += side_.at(j).codewords_for(side_len);
  const std::size_t cnt = side_.at(main_state).codewords_for(side_len);
  if (record.received.size() < off + cnt) throw std::invalid_argument("compound aux record is truncated");
  std::vector<Symbols> mine(record.received.begin() + static_cast<long>(off),
                            record.received.begin() + static_cast<long>(off + cnt));
  const BitVector side = side_[main_state].decode_stream(mine, side_len);
  std::vector<BitVector> eps;
  for (std::size_t b = 0; b < B; ++b) eps.push_back(slice(side, b * s.e_prime_length(), s.e_prime_length()));
  std::vector<Symbols> y(record.received.begin(), record.received.begin() + static_cast<long>(B * n));
  const auto msgs = ccc_.decode(main_state + 1, y, slice(side, B * s.e_prime_length(), s.e_length()), eps);
  BitVector out;
  for (const auto& m : msgs) append(out, m);
  out.resize(record.length);
  return out;
}

// ---------------------------------------------------------------------------

WiretapCode make_compound_wiretap_code(const SourceSpec& source, const ChannelFamily& family,
                                       const CompoundOptions& opt) {
  family.validate();
  const std::size_t J = family.mains.size();
  if (opt.multipliers.size() != J) throw std::invalid_argument("need one multiplier per main channel");
  const PolarParams& params = opt.params;
  const double d = params.delta();

  IndexSets sets = construct_index_sets(source, family.mains[0], params, opt.profile);
  CompoundSpec spec;
  spec.K = params.K;
  spec.multipliers = opt.multipliers;
  spec.V = sets.V_U;
  spec.H.push_back(sets.H_UY);
  spec.Vj.push_back(sets.V_UY);
  for (std::size_t t = 1; t < J; ++t) {
    ProfileOptions o = opt.profile;
    o.seed = derive_seed(opt.profile.seed, 100 + t);
    const auto prof = entropy_profile(source, &family.mains[t], Role::U_given_Y, params, o);
    IndexSet v = set_intersection(threshold_set(prof, 1.0 - d), sets.V_U);
    spec.H.push_back(set_union(threshold_set(prof, d), v));
    spec.Vj.push_back(std::move(v));
  }
  for (std::size_t t = 0; t < J; ++t) spec.laws.push_back(role_law(Role::U_given_Y, source, &family.mains[t]));
  for (std::size_t t = 1; t < J; ++t) {
    sets.V_UY = set_intersection(sets.V_UY, spec.Vj[t]);
    sets.H_UY = set_union(sets.H_UY, spec.H[t]);
  }
  auto coder = std::make_shared<CompoundSideInfoCoder>(spec);

  DeriveOptions dopt = opt.derive;
  dopt.pieces = spec.pieces();
  dopt.e_length = coder->e_length();
  dopt.e_prime_length = coder->e_prime_length();
  WiretapCode code;
  code.config = derive_params(sets, params, source, family, dopt);
  code.coder = coder;
  if (J == 1) {
    code.aux = std::make_shared<PolarAuxTransport>(design_aux_code(family.mains[0], params.K, opt.aux));
  } else {
    ProfileOptions po{ProfileMode::monte_carlo, opt.aux.samples, opt.aux.seed, opt.aux.threads, opt.aux.store};
    if (params.K <= 8) po.mode = ProfileMode::exact;
    auto ccc = CompoundChannelCode::build(family.mains, params.K, opt.multipliers, params.beta, po);
    // one polar code per main channel at the worst channel's rate
    std::vector<PolarChannelCode> side;
    double worst = 1.0;
    std::vector<EntropyProfile> profs;
    for (std::size_t t = 0; t < J; ++t) {
      ProfileOptions o = po;
      o.seed = derive_seed(opt.aux.seed, 300 + t);
      profs.push_back(entropy_profile(role_law(Role::X_given_Y, SourceSpec::uniform_identity(), &family.mains[t]),
                                      params.K, o));
      worst = std::min(worst, 1.0 - profs.back().mean());
    }
    const double rate = std::min(std::max(opt.aux.rate_fraction * worst, 1.0 / static_cast<double>(params.K)), worst);
    for (std::size_t t = 0; t < J; ++t) side.push_back(PolarChannelCode::build(family.mains[t], profs[t], rate));
    code.aux = std::make_shared<CompoundAuxTransport>(std::move(ccc), std::move(side));
  }
  return code;
}

}  // namespace wiretap
