#include "wiretap/galois.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define WIRETAP_HAVE_X86 1
#endif

namespace wiretap {

extern const char* const kModulusTable;  // generated from data/moduli.txt

namespace {

using Words = std::vector<std::uint64_t>;

#ifdef WIRETAP_HAVE_X86
__attribute__((target("pclmul,sse2"))) void clmul64_hw(std::uint64_t a, std::uint64_t b, std::uint64_t& lo,
                                                       std::uint64_t& hi) {
  __m128i r = _mm_clmulepi64_si128(_mm_cvtsi64_si128(static_cast<long long>(a)),
                                   _mm_cvtsi64_si128(static_cast<long long>(b)), 0x00);
  lo = static_cast<std::uint64_t>(_mm_cvtsi128_si64(r));
  hi = static_cast<std::uint64_t>(_mm_cvtsi128_si64(_mm_srli_si128(r, 8)));
}
#endif

void clmul64_sw(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi) {
  // 4-bit window over b; the table keeps products of a with nibbles, split in
  // low/high words to avoid losing the top three bits.
  std::uint64_t tl[16], th[16];
  tl[0] = th[0] = 0;
  for (int i = 1; i < 16; ++i) {
    tl[i] = 0;
    th[i] = 0;
    for (int k = 0; k < 4; ++k)
      if ((i >> k) & 1) {
        tl[i] ^= a << k;
        th[i] ^= k ? a >> (64 - k) : 0;
      }
  }
  lo = hi = 0;
  for (int s = 60; s >= 0; s -= 4) {
    unsigned nib = (b >> s) & 15u;
    // shift accumulated result left by 4
    if (s != 60) {
      hi = (hi << 4) | (lo >> 60);
      lo <<= 4;
    }
    lo ^= tl[nib];
    hi ^= th[nib];
  }
}

bool hw_available() {
#ifdef WIRETAP_HAVE_X86
  static const bool ok = __builtin_cpu_supports("pclmul");
  return ok;
#else
  return false;
#endif
}

void schoolbook(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::span<std::uint64_t> out,
                bool hw) {
  std::fill(out.begin(), out.end(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      std::uint64_t lo, hi;
#ifdef WIRETAP_HAVE_X86
      if (hw)
        clmul64_hw(a[i], b[j], lo, hi);
      else
        clmul64_sw(a[i], b[j], lo, hi);
#else
      (void)hw;
      clmul64_sw(a[i], b[j], lo, hi);
#endif
      out[i + j] ^= lo;
      out[i + j + 1] ^= hi;
    }
  }
}

constexpr std::size_t kKaratsubaCutoff = 32;

void karatsuba(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::span<std::uint64_t> out,
               bool hw) {
  const std::size_t n = a.size();
  if (n < kKaratsubaCutoff || b.size() != n) {
    schoolbook(a, b, out, hw);
    return;
  }
  const std::size_t h = (n + 1) / 2, m = n - h;
  std::fill(out.begin(), out.end(), 0);
  karatsuba(a.subspan(0, h), b.subspan(0, h), out.subspan(0, 2 * h), hw);
  karatsuba(a.subspan(h, m), b.subspan(h, m), out.subspan(2 * h, 2 * m), hw);
  Words a01(a.begin(), a.begin() + h), b01(b.begin(), b.begin() + h);
  for (std::size_t i = 0; i < m; ++i) {
    a01[i] ^= a[h + i];
    b01[i] ^= b[h + i];
  }
  Words mid(2 * h);
  karatsuba(a01, b01, mid, hw);
  for (std::size_t i = 0; i < 2 * h; ++i) mid[i] ^= out[i];
  for (std::size_t i = 0; i < 2 * m; ++i) mid[i] ^= out[2 * h + i];
  for (std::size_t i = 0; i < 2 * h; ++i) out[h + i] ^= mid[i];
}

// dst ^= src << shift (bits); dst must be large enough.
void xor_shifted(Words& dst, const Words& src, std::size_t shift) {
  const std::size_t ws = shift >> 6, bs = shift & 63;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] == 0) continue;
    if (i + ws < dst.size()) dst[i + ws] ^= src[i] << bs;
    if (bs && i + ws + 1 < dst.size()) dst[i + ws + 1] ^= src[i] >> (64 - bs);
  }
}

long degree(const Words& p) {
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i]) return static_cast<long>(i * 64 + 63 - static_cast<std::size_t>(__builtin_clzll(p[i])));
  return -1;
}

Words modulus_words(const FieldSpec& f) {
  Words m(f.n / 64 + 1, 0);
  for (auto t : f.terms) m[t >> 6] |= std::uint64_t{1} << (t & 63);
  return m;
}

std::uint16_t spread8(unsigned x) {
  std::uint16_t r = 0;
  for (int i = 0; i < 8; ++i) r |= static_cast<std::uint16_t>(((x >> i) & 1u) << (2 * i));
  return r;
}

const std::uint16_t* spread_table() {
  static const auto table = [] {
    std::vector<std::uint16_t> t(256);
    for (unsigned i = 0; i < 256; ++i) t[i] = spread8(i);
    return t;
  }();
  return table.data();
}

Words square_words(const Words& a) {
  const auto* t = spread_table();
  Words out(2 * a.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::uint64_t lo = 0, hi = 0;
    for (int k = 0; k < 4; ++k) {
      lo |= static_cast<std::uint64_t>(t[(a[i] >> (8 * k)) & 0xFF]) << (16 * k);
      hi |= static_cast<std::uint64_t>(t[(a[i] >> (32 + 8 * k)) & 0xFF]) << (16 * k);
    }
    out[2 * i] = lo;
    out[2 * i + 1] = hi;
  }
  return out;
}

Words poly_gcd(Words a, Words b) {
  long da = degree(a), db = degree(b);
  while (db >= 0) {
    while (da >= db) {
      xor_shifted(a, b, static_cast<std::size_t>(da - db));
      da = degree(a);
    }
    std::swap(a, b);
    std::swap(da, db);
  }
  return a;
}

std::vector<unsigned> prime_factors(unsigned n) {
  std::vector<unsigned> ps;
  for (unsigned p = 2; p * p <= n; ++p)
    if (n % p == 0) {
      ps.push_back(p);
      while (n % p == 0) n /= p;
    }
  if (n > 1) ps.push_back(n);
  return ps;
}

// ---- small polynomial helpers on 64-bit words (degree <= 31) ----

std::uint64_t small_mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t g, int dg) {
  std::uint64_t r = 0;
  while (b) {
    if (b & 1) r ^= a;
    b >>= 1;
    a <<= 1;
    if ((a >> dg) & 1) a ^= g;
  }
  return r;
}

std::uint64_t small_xpow(std::uint64_t e, std::uint64_t g, int dg) {
  std::uint64_t result = 1, base = dg > 1 ? 2 : (2 ^ g);
  while (e) {
    if (e & 1) result = small_mulmod(result, base, g, dg);
    base = small_mulmod(base, base, g, dg);
    e >>= 1;
  }
  return result;
}

int small_degree(std::uint64_t p) { return p ? 63 - __builtin_clzll(p) : -1; }

std::uint64_t small_mod(std::uint64_t a, std::uint64_t g) {
  int dg = small_degree(g);
  for (int d = small_degree(a); d >= dg; d = small_degree(a)) a ^= g << (d - dg);
  return a;
}

std::uint64_t terms_to_small(const FieldSpec& f) {
  std::uint64_t p = 0;
  for (auto t : f.terms) p |= std::uint64_t{1} << t;
  return p;
}

const std::vector<std::uint64_t>& small_irreducibles() {
  static const auto list = [] {
    constexpr int kMaxDegree = 16;
    std::vector<std::uint64_t> out;
    for (std::uint64_t p = 2; p < (std::uint64_t{1} << (kMaxDegree + 1)); ++p) {
      int d = small_degree(p);
      bool irr = true;
      for (auto g : out) {
        if (2 * small_degree(g) > d) break;
        if (small_mod(p, g) == 0) {
          irr = false;
          break;
        }
      }
      if (irr) out.push_back(p);
    }
    return out;
  }();
  return list;
}

bool has_small_factor(unsigned n, const std::vector<unsigned>& low_terms) {
  for (auto g : small_irreducibles()) {
    int dg = small_degree(g);
    if (2 * dg > static_cast<int>(n)) break;
    std::uint64_t r = small_xpow(n, g, dg);
    for (auto t : low_terms) r ^= small_xpow(t, g, dg);
    if (r == 0) return true;
  }
  return false;
}

struct ModulusCatalog {
  std::mutex mu;
  std::map<unsigned, FieldSpec> found;
  std::map<unsigned, std::vector<unsigned>> table;
  bool loaded = false;

  void load() {
    if (loaded) return;
    std::istringstream in(kModulusTable);
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::istringstream ls(line);
      std::vector<unsigned> ex;
      unsigned v;
      while (ls >> v) ex.push_back(v);
      if (ex.empty()) continue;
      ex.push_back(0);
      table[ex.front()] = ex;
    }
    loaded = true;
  }
};

ModulusCatalog& catalog() {
  static ModulusCatalog c;
  return c;
}

constexpr unsigned kMaxSearchDegree = 16384;

FieldSpec search_modulus(unsigned n) {
  auto irreducible = [n](const FieldSpec& f) {
    return n <= 32 ? is_irreducible_trial_division(f) : is_irreducible(f);
  };
  for (unsigned k = 1; k < n; ++k) {
    if (n > 32 && has_small_factor(n, {k, 0})) continue;
    auto f = FieldSpec::from_terms({n, k, 0});
    if (irreducible(f)) return f;
  }
  for (unsigned a = 3; a < n; ++a)
    for (unsigned b = 2; b < a; ++b)
      for (unsigned c = 1; c < b; ++c) {
        if (n > 32 && has_small_factor(n, {a, b, c, 0})) continue;
        auto f = FieldSpec::from_terms({n, a, b, c, 0});
        if (irreducible(f)) return f;
      }
  throw std::runtime_error("no irreducible trinomial or pentanomial found");
}

}  // namespace

// ---------------- FieldSpec ----------------

FieldSpec FieldSpec::from_terms(std::vector<unsigned> exponents) {
  std::sort(exponents.begin(), exponents.end(), std::greater<>());
  exponents.erase(std::unique(exponents.begin(), exponents.end()), exponents.end());
  if (exponents.empty() || exponents.front() == 0) throw std::invalid_argument("modulus must have positive degree");
  FieldSpec f;
  f.n = exponents.front();
  f.terms = std::move(exponents);
  return f;
}

FieldSpec FieldSpec::from_bits(std::span<const Bit> modulus) {
  if (modulus.size() < 2 || !modulus[0]) throw std::invalid_argument("modulus bits must start with the x^n coefficient");
  const unsigned n = static_cast<unsigned>(modulus.size() - 1);
  std::vector<unsigned> ex;
  for (unsigned i = 0; i <= n; ++i)
    if (modulus[i]) ex.push_back(n - i);
  return from_terms(ex);
}

BitVector FieldSpec::modulus_bits() const {
  BitVector b(n + 1, 0);
  for (auto t : terms) b[n - t] = 1;
  return b;
}

std::string FieldSpec::describe() const {
  std::string s;
  for (auto t : terms) {
    if (!s.empty()) s += '+';
    if (t == 0)
      s += '1';
    else if (t == 1)
      s += 'x';
    else
      s += "x^" + std::to_string(t);
  }
  return s;
}

// ---------------- FieldElem ----------------

FieldElem FieldElem::one(unsigned n) {
  FieldElem e(n);
  e.w_[0] = 1;
  return e;
}

FieldElem FieldElem::from_bits(std::span<const Bit> bits) {
  const unsigned n = static_cast<unsigned>(bits.size());
  FieldElem e(n);
  for (unsigned k = 0; k < n; ++k)
    if (bits[k]) {
      unsigned i = n - 1 - k;
      e.w_[i >> 6] |= std::uint64_t{1} << (i & 63);
    }
  return e;
}

FieldElem FieldElem::from_words(unsigned n, std::vector<std::uint64_t> words) {
  FieldElem e(n);
  words.resize(e.w_.size(), 0);
  if (n % 64 && (words.back() >> (n % 64)) != 0) throw std::invalid_argument("word value exceeds field degree");
  e.w_ = std::move(words);
  return e;
}

BitVector FieldElem::bits() const {
  BitVector b(n_);
  for (unsigned k = 0; k < n_; ++k) b[k] = coeff(n_ - 1 - k);
  return b;
}

std::string FieldElem::to_hex() const {
  static const char* digits = "0123456789abcdef";
  const unsigned nd = (n_ + 3) / 4;
  std::string s(nd, '0');
  for (unsigned d = 0; d < nd; ++d) {
    unsigned v = 0;
    for (unsigned k = 0; k < 4; ++k) {
      unsigned i = 4 * d + k;
      if (i < n_ && coeff(i)) v |= 1u << k;
    }
    s[nd - 1 - d] = digits[v];
  }
  return s;
}

FieldElem FieldElem::from_hex(unsigned n, const std::string& hex) {
  const unsigned nd = (n + 3) / 4;
  if (hex.size() != nd) throw std::invalid_argument("hex length does not match field degree");
  FieldElem e(n);
  for (unsigned d = 0; d < nd; ++d) {
    char c = hex[nd - 1 - d];
    unsigned v;
    if (c >= '0' && c <= '9')
      v = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f')
      v = static_cast<unsigned>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F')
      v = static_cast<unsigned>(c - 'A' + 10);
    else
      throw std::invalid_argument("invalid hex digit");
    for (unsigned k = 0; k < 4; ++k)
      if ((v >> k) & 1u) {
        unsigned i = 4 * d + k;
        if (i >= n) throw std::invalid_argument("hex value exceeds field degree");
        e.w_[i >> 6] |= std::uint64_t{1} << (i & 63);
      }
  }
  return e;
}

bool FieldElem::is_zero() const {
  return std::all_of(w_.begin(), w_.end(), [](std::uint64_t x) { return x == 0; });
}

bool FieldElem::is_one() const {
  if (w_.empty() || w_[0] != 1) return false;
  return std::all_of(w_.begin() + 1, w_.end(), [](std::uint64_t x) { return x == 0; });
}

FieldElem& FieldElem::operator^=(const FieldElem& o) {
  if (o.n_ != n_) throw std::invalid_argument("field element size mismatch");
  for (std::size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
  return *this;
}

// ---------------- arithmetic ----------------

bool clmul_hardware_available() { return hw_available(); }

namespace detail {

void clmul_words(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::span<std::uint64_t> out,
                 ClmulPath path) {
  bool hw = path == ClmulPath::hardware || (path == ClmulPath::automatic && hw_available());
  if (hw && !hw_available()) throw std::runtime_error("hardware carry-less multiply not available");
  karatsuba(a, b, out, hw);
}

void reduce_words(std::vector<std::uint64_t>& p, const FieldSpec& spec) {
  const unsigned n = spec.n;
  const std::size_t nw = (n + 63) / 64;
  const std::size_t ws = n >> 6, bs = n & 63;
  Words hi;
  for (;;) {
    // hi = p >> n, then clear bits >= n
    hi.assign(p.size() > ws ? p.size() - ws : 0, 0);
    bool any = false;
    for (std::size_t i = 0; i < hi.size(); ++i) {
      std::uint64_t v = p[ws + i] >> bs;
      if (bs && ws + i + 1 < p.size()) v |= p[ws + i + 1] << (64 - bs);
      hi[i] = v;
      any |= v != 0;
    }
    if (!any) break;
    if (bs) {
      p[ws] &= (std::uint64_t{1} << bs) - 1;
      std::fill(p.begin() + static_cast<long>(ws) + 1, p.end(), 0);
    } else {
      std::fill(p.begin() + static_cast<long>(ws), p.end(), 0);
    }
    while (!hi.empty() && hi.back() == 0) hi.pop_back();
    for (std::size_t k = 1; k < spec.terms.size(); ++k) xor_shifted(p, hi, spec.terms[k]);
  }
  p.resize(nw);
}

}  // namespace detail

FieldElem gf_mul(const FieldElem& a, const FieldElem& b, const FieldSpec& spec, ClmulPath path) {
  if (a.n() != spec.n || b.n() != spec.n) throw std::invalid_argument("gf_mul: operand length does not match field");
  const std::size_t nw = spec.words();
  Words prod(2 * nw + 1, 0);
  detail::clmul_words(a.words(), b.words(), std::span(prod).subspan(0, 2 * nw), path);
  detail::reduce_words(prod, spec);
  return FieldElem::from_words(spec.n, std::move(prod));
}

FieldElem gf_square(const FieldElem& a, const FieldSpec& spec) {
  if (a.n() != spec.n) throw std::invalid_argument("gf_square: operand length does not match field");
  Words sq = square_words(a.words());
  sq.push_back(0);
  detail::reduce_words(sq, spec);
  return FieldElem::from_words(spec.n, std::move(sq));
}

FieldElem gf_inv(const FieldElem& a, const FieldSpec& spec) {
  if (a.n() != spec.n) throw std::invalid_argument("gf_inv: operand length does not match field");
  if (a.is_zero()) throw std::domain_error("zero has no multiplicative inverse");
  const std::size_t w = spec.n / 64 + 1;
  Words u = a.words(), v = modulus_words(spec), g1(w, 0), g2(w, 0);
  u.resize(w, 0);
  g1[0] = 1;
  long du = degree(u), dv = degree(v);
  while (du > 0) {
    long j = du - dv;
    if (j < 0) {
      std::swap(u, v);
      std::swap(g1, g2);
      std::swap(du, dv);
      j = -j;
    }
    xor_shifted(u, v, static_cast<std::size_t>(j));
    xor_shifted(g1, g2, static_cast<std::size_t>(j));
    du = degree(u);
  }
  g1.push_back(0);
  g1.resize(std::max<std::size_t>(g1.size(), 2 * spec.words() + 1), 0);
  detail::reduce_words(g1, spec);
  return FieldElem::from_words(spec.n, std::move(g1));
}

BitVector uh_hash(const FieldElem& r, const FieldElem& t, std::size_t out_len, const FieldSpec& spec) {
  if (r.is_zero()) throw std::domain_error("hash seed must be nonzero");
  if (out_len == 0 || out_len > spec.n) throw std::out_of_range("hash output length out of range");
  auto bits = gf_mul(r, t, spec).bits();
  bits.resize(out_len);
  return bits;
}

FieldElem hash_preimage(const FieldElem& r, std::span<const Bit> payload, const FieldSpec& spec) {
  if (r.is_zero()) throw std::domain_error("hash seed must be nonzero");
  if (payload.size() != spec.n) throw std::invalid_argument("payload length does not match field");
  return gf_mul(gf_inv(r, spec), FieldElem::from_bits(payload), spec);
}

// ---------------- irreducibility and moduli ----------------

bool is_irreducible_trial_division(const FieldSpec& f) {
  if (f.n > 32) throw std::invalid_argument("trial division limited to n <= 32");
  const std::uint64_t p = terms_to_small(f);
  for (std::uint64_t g = 2; small_degree(g) <= static_cast<int>(f.n / 2); ++g)
    if (small_mod(p, g) == 0) return false;
  return true;
}

bool is_irreducible(const FieldSpec& f) {
  const unsigned n = f.n;
  if (n == 1) return true;
  if (f.terms.back() != 0) return false;  // divisible by x
  if (n <= 32) return is_irreducible_trial_division(f);
  const Words fw = modulus_words(f);
  const auto primes = prime_factors(n);
  std::vector<unsigned> checkpoints;
  for (auto p : primes) checkpoints.push_back(n / p);

  Words x(f.words(), 0);
  x[0] = 2;
  Words cur = x;
  for (unsigned k = 1; k <= n; ++k) {
    Words sq = square_words(cur);
    sq.push_back(0);
    detail::reduce_words(sq, f);
    cur = std::move(sq);
    if (std::find(checkpoints.begin(), checkpoints.end(), k) != checkpoints.end()) {
      Words d = cur;
      d[0] ^= 2;
      d.resize(fw.size(), 0);
      Words g = poly_gcd(fw, d);
      if (degree(g) != 0) return false;
    }
  }
  return cur == x;
}

unsigned max_supported_degree() { return kMaxSearchDegree; }

FieldSpec std_modulus(unsigned n) {
  if (n == 0) throw std::invalid_argument("field degree must be positive");
  if (n == 1) return FieldSpec::from_terms({1, 0});
  auto& cat = catalog();
  std::lock_guard lock(cat.mu);
  if (auto it = cat.found.find(n); it != cat.found.end()) return it->second;
  cat.load();
  FieldSpec f;
  if (auto it = cat.table.find(n); it != cat.table.end()) {
    f = FieldSpec::from_terms(it->second);
    if (n <= 32 && !is_irreducible_trial_division(f)) throw std::logic_error("modulus table entry is reducible");
  } else if (n <= kMaxSearchDegree) {
    f = search_modulus(n);
  } else {
    throw std::out_of_range("unsupported field degree " + std::to_string(n));
  }
  cat.found.emplace(n, f);
  return f;
}

}  // namespace wiretap
