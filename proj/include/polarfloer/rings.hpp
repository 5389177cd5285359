// Coefficient rings: GF(2), F2[t], F2[t,t^-1] and the group ring F2[Z/2].
#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace polarfloer {

struct Gf2 {
  bool v = false;

  constexpr Gf2() = default;
  constexpr explicit Gf2(bool b) : v(b) {}

  static constexpr Gf2 zero() { return Gf2(false); }
  static constexpr Gf2 one() { return Gf2(true); }
  constexpr bool is_zero() const { return !v; }

  friend constexpr Gf2 operator+(Gf2 a, Gf2 b) { return Gf2(a.v != b.v); }
  friend constexpr Gf2 operator*(Gf2 a, Gf2 b) { return Gf2(a.v && b.v); }
  Gf2& operator+=(Gf2 o) { v = v != o.v; return *this; }
  Gf2& operator*=(Gf2 o) { v = v && o.v; return *this; }
  friend constexpr bool operator==(Gf2, Gf2) = default;
  friend constexpr auto operator<=>(Gf2, Gf2) = default;
};

// Polynomial over GF(2), stored as a little-endian word bitvector with no
// trailing zero words.
class F2Poly {
 public:
  using Word = std::uint64_t;
  static constexpr int kBits = 64;

  F2Poly() = default;

  static F2Poly zero() { return F2Poly(); }
  static F2Poly one() { return monomial(0); }
  static F2Poly monomial(int k) {
    if (k < 0) throw std::invalid_argument("F2Poly::monomial: negative exponent");
    F2Poly p;
    p.w_.resize(static_cast<std::size_t>(k / kBits) + 1, 0);
    p.w_.back() = Word{1} << (k % kBits);
    return p;
  }
  static F2Poly from_exponents(const std::vector<int>& exps) {
    F2Poly p;
    for (int e : exps) p.flip(e);
    return p;
  }
  // Low bits of the word, as used by random generators.
  static F2Poly from_word(Word w) {
    F2Poly p;
    if (w) p.w_.push_back(w);
    return p;
  }

  bool is_zero() const { return w_.empty(); }
  bool is_one() const { return w_.size() == 1 && w_[0] == 1; }
  int degree() const {
    if (w_.empty()) return -1;
    return static_cast<int>(w_.size() - 1) * kBits + (kBits - 1 - std::countl_zero(w_.back()));
  }
  // Exponent of the lowest nonzero term; -1 for zero.
  int valuation() const {
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (w_[i]) return static_cast<int>(i) * kBits + std::countr_zero(w_[i]);
    return -1;
  }
  int term_count() const {
    int c = 0;
    for (Word x : w_) c += std::popcount(x);
    return c;
  }
  bool coeff(int k) const {
    if (k < 0) return false;
    std::size_t i = static_cast<std::size_t>(k / kBits);
    if (i >= w_.size()) return false;
    return (w_[i] >> (k % kBits)) & 1U;
  }
  void flip(int k) {
    if (k < 0) throw std::invalid_argument("F2Poly::flip: negative exponent");
    std::size_t i = static_cast<std::size_t>(k / kBits);
    if (i >= w_.size()) w_.resize(i + 1, 0);
    w_[i] ^= Word{1} << (k % kBits);
    trim();
  }
  std::vector<int> exponents() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      Word x = w_[i];
      while (x) {
        int b = std::countr_zero(x);
        out.push_back(static_cast<int>(i) * kBits + b);
        x &= x - 1;
      }
    }
    return out;
  }

  // Multiplication by t^k.
  F2Poly shifted_up(int k) const {
    if (k < 0) throw std::invalid_argument("F2Poly::shifted_up: negative shift");
    if (is_zero() || k == 0) return *this;
    F2Poly r;
    std::size_t ws = static_cast<std::size_t>(k / kBits);
    int bs = k % kBits;
    r.w_.assign(w_.size() + ws + 1, 0);
    for (std::size_t i = 0; i < w_.size(); ++i) {
      r.w_[i + ws] ^= w_[i] << bs;
      if (bs) r.w_[i + ws + 1] ^= w_[i] >> (kBits - bs);
    }
    r.trim();
    return r;
  }
  // Division by t^k, discarding terms of exponent below k.
  F2Poly shifted_down(int k) const {
    if (k < 0) throw std::invalid_argument("F2Poly::shifted_down: negative shift");
    if (is_zero() || k == 0) return *this;
    F2Poly r;
    std::size_t ws = static_cast<std::size_t>(k / kBits);
    int bs = k % kBits;
    if (ws >= w_.size()) return r;
    r.w_.assign(w_.size() - ws, 0);
    for (std::size_t i = ws; i < w_.size(); ++i) {
      r.w_[i - ws] ^= w_[i] >> bs;
      if (bs && i + 1 < w_.size()) r.w_[i - ws] ^= w_[i + 1] << (kBits - bs);
    }
    r.trim();
    return r;
  }
  // Keep only terms of exponent < k.
  F2Poly truncated(int k) const {
    if (k <= 0) return F2Poly();
    F2Poly r = *this;
    std::size_t keep = static_cast<std::size_t>((k + kBits - 1) / kBits);
    if (r.w_.size() > keep) r.w_.resize(keep);
    if (k % kBits && r.w_.size() == keep) r.w_.back() &= (Word{1} << (k % kBits)) - 1;
    r.trim();
    return r;
  }
  // Coefficients reversed within degree d: t^d p(1/t). Requires d >= degree().
  F2Poly reversed(int d) const {
    F2Poly r;
    for (int e : exponents()) r.flip(d - e);
    return r;
  }

  F2Poly& operator+=(const F2Poly& o) {
    if (o.w_.size() > w_.size()) w_.resize(o.w_.size(), 0);
    for (std::size_t i = 0; i < o.w_.size(); ++i) w_[i] ^= o.w_[i];
    trim();
    return *this;
  }
  friend F2Poly operator+(F2Poly a, const F2Poly& b) { return a += b; }
  friend F2Poly operator-(F2Poly a, const F2Poly& b) { return a += b; }

  friend F2Poly operator*(const F2Poly& a, const F2Poly& b) {
    if (a.is_zero() || b.is_zero()) return F2Poly();
    const F2Poly& sparse = a.term_count() <= b.term_count() ? a : b;
    const F2Poly& dense = &sparse == &a ? b : a;
    F2Poly r;
    r.w_.assign(a.w_.size() + b.w_.size() + 1, 0);
    for (std::size_t i = 0; i < sparse.w_.size(); ++i) {
      Word x = sparse.w_[i];
      while (x) {
        int bit = std::countr_zero(x);
        x &= x - 1;
        for (std::size_t j = 0; j < dense.w_.size(); ++j) {
          r.w_[i + j] ^= dense.w_[j] << bit;
          if (bit) r.w_[i + j + 1] ^= dense.w_[j] >> (kBits - bit);
        }
      }
    }
    r.trim();
    return r;
  }
  F2Poly& operator*=(const F2Poly& o) { return *this = *this * o; }

  // Euclidean division: a = q*b + r with deg r < deg b.
  friend std::pair<F2Poly, F2Poly> divmod(const F2Poly& a, const F2Poly& b) {
    if (b.is_zero()) throw std::domain_error("F2Poly: division by zero");
    F2Poly q, r = a;
    int db = b.degree();
    while (!r.is_zero() && r.degree() >= db) {
      int s = r.degree() - db;
      q.flip(s);
      r += b.shifted_up(s);
    }
    return {q, r};
  }
  friend F2Poly gcd(F2Poly a, F2Poly b) {
    while (!b.is_zero()) {
      F2Poly r = divmod(a, b).second;
      a = std::move(b);
      b = std::move(r);
    }
    return a;
  }
  bool divides(const F2Poly& x) const {
    if (is_zero()) return x.is_zero();
    return divmod(x, *this).second.is_zero();
  }

  friend bool operator==(const F2Poly& a, const F2Poly& b) {
    return std::equal(a.w_.begin(), a.w_.end(), b.w_.begin(), b.w_.end());
  }
  // Total order: by degree, then by coefficients from the top.
  friend std::strong_ordering operator<=>(const F2Poly& a, const F2Poly& b) {
    if (auto c = a.w_.size() <=> b.w_.size(); c != 0) return c;
    for (std::size_t i = a.w_.size(); i-- > 0;)
      if (auto c = a.w_[i] <=> b.w_[i]; c != 0) return c;
    return std::strong_ordering::equal;
  }

  std::string str() const;

 private:
  void trim() {
    while (!w_.empty() && w_.back() == 0) w_.pop_back();
  }
  boost::container::small_vector<Word, 2> w_;
};

// Laurent polynomial t^shift * p with p(0) = 1 (or the zero element).
class F2Laurent {
 public:
  F2Laurent() = default;
  F2Laurent(const F2Poly& p) { assign(0, p); }  // NOLINT: polynomial embedding
  F2Laurent(int shift, const F2Poly& p) { assign(shift, p); }

  static F2Laurent zero() { return F2Laurent(); }
  static F2Laurent one() { return F2Laurent(F2Poly::one()); }
  static F2Laurent monomial(int k) { return F2Laurent(k, F2Poly::one()); }

  bool is_zero() const { return p_.is_zero(); }
  bool is_unit() const { return p_.is_one(); }
  int min_exponent() const { return p_.is_zero() ? 0 : shift_; }
  int max_exponent() const { return p_.is_zero() ? 0 : shift_ + p_.degree(); }
  // Degree span; the Euclidean norm on F2[t,t^-1].
  int span() const { return p_.is_zero() ? -1 : p_.degree(); }
  const F2Poly& normalized_poly() const { return p_; }
  bool coeff(int k) const { return p_.coeff(k - shift_); }
  std::vector<int> exponents() const {
    std::vector<int> e = p_.exponents();
    for (int& x : e) x += shift_;
    return e;
  }
  bool is_polynomial() const { return is_zero() || shift_ >= 0; }
  F2Poly to_poly() const {
    if (!is_polynomial()) throw std::domain_error("F2Laurent::to_poly: negative exponent");
    return p_.shifted_up(shift_);
  }
  F2Laurent times_monomial(int k) const {
    if (is_zero()) return *this;
    F2Laurent r = *this;
    r.shift_ += k;
    return r;
  }
  // Image under the involution t -> t^-1.
  F2Laurent reciprocal() const {
    if (is_zero()) return *this;
    return F2Laurent(-max_exponent(), p_.reversed(p_.degree()));
  }
  F2Laurent inverse_unit() const {
    if (!is_unit()) throw std::domain_error("F2Laurent: element is not a unit");
    return monomial(-shift_);
  }

  F2Laurent& operator+=(const F2Laurent& o) {
    if (o.is_zero()) return *this;
    if (is_zero()) return *this = o;
    int m = std::min(shift_, o.shift_);
    F2Poly s = p_.shifted_up(shift_ - m) + o.p_.shifted_up(o.shift_ - m);
    assign(m, s);
    return *this;
  }
  friend F2Laurent operator+(F2Laurent a, const F2Laurent& b) { return a += b; }
  friend F2Laurent operator-(F2Laurent a, const F2Laurent& b) { return a += b; }
  friend F2Laurent operator*(const F2Laurent& a, const F2Laurent& b) {
    if (a.is_zero() || b.is_zero()) return F2Laurent();
    F2Laurent r;
    r.shift_ = a.shift_ + b.shift_;
    r.p_ = a.p_ * b.p_;
    return r;
  }
  F2Laurent& operator*=(const F2Laurent& o) { return *this = *this * o; }

  // Euclidean division with respect to the span norm.
  friend std::pair<F2Laurent, F2Laurent> divmod(const F2Laurent& a, const F2Laurent& b) {
    if (b.is_zero()) throw std::domain_error("F2Laurent: division by zero");
    if (a.is_zero()) return {F2Laurent(), F2Laurent()};
    auto [q, r] = divmod(a.p_, b.p_);
    return {F2Laurent(a.shift_ - b.shift_, q), F2Laurent(a.shift_, r)};
  }
  bool divides(const F2Laurent& x) const {
    if (is_zero()) return x.is_zero();
    return divmod(x, *this).second.is_zero();
  }

  friend bool operator==(const F2Laurent& a, const F2Laurent& b) {
    return a.p_ == b.p_ && a.min_exponent() == b.min_exponent();
  }
  friend std::strong_ordering operator<=>(const F2Laurent& a, const F2Laurent& b) {
    if (auto c = a.min_exponent() <=> b.min_exponent(); c != 0) return c;
    return a.p_ <=> b.p_;
  }

  std::string str() const;

 private:
  void assign(int shift, const F2Poly& p) {
    if (p.is_zero()) {
      shift_ = 0;
      p_ = F2Poly();
      return;
    }
    int v = p.valuation();
    shift_ = shift + v;
    p_ = p.shifted_down(v);
  }
  int shift_ = 0;
  F2Poly p_;
};

// Namespace-scope declarations so the hidden friends are reachable by
// qualified name.
std::pair<F2Poly, F2Poly> divmod(const F2Poly& a, const F2Poly& b);
std::pair<F2Laurent, F2Laurent> divmod(const F2Laurent& a, const F2Laurent& b);
F2Poly gcd(F2Poly a, F2Poly b);

// Element a + b*iota of F2[Z/2].
struct GroupRingElem {
  bool a = false;
  bool b = false;

  constexpr GroupRingElem() = default;
  constexpr GroupRingElem(bool a_, bool b_) : a(a_), b(b_) {}

  static constexpr GroupRingElem zero() { return {false, false}; }
  static constexpr GroupRingElem one() { return {true, false}; }
  static constexpr GroupRingElem iota() { return {false, true}; }
  static constexpr GroupRingElem norm() { return {true, true}; }  // 1 + iota

  constexpr bool is_zero() const { return !a && !b; }
  // Augmentation a + b.
  constexpr Gf2 augment() const { return Gf2(a != b); }
  constexpr GroupRingElem conj_iota() const { return {b, a}; }

  friend constexpr GroupRingElem operator+(GroupRingElem x, GroupRingElem y) {
    return {x.a != y.a, x.b != y.b};
  }
  friend constexpr GroupRingElem operator-(GroupRingElem x, GroupRingElem y) { return x + y; }
  friend constexpr GroupRingElem operator*(GroupRingElem x, GroupRingElem y) {
    return {(x.a && y.a) != (x.b && y.b), (x.a && y.b) != (x.b && y.a)};
  }
  GroupRingElem& operator+=(GroupRingElem o) { return *this = *this + o; }
  GroupRingElem& operator*=(GroupRingElem o) { return *this = *this * o; }
  friend constexpr bool operator==(GroupRingElem, GroupRingElem) = default;
  friend constexpr auto operator<=>(GroupRingElem, GroupRingElem) = default;

  std::string str() const {
    if (a && b) return "1+i";
    if (a) return "1";
    if (b) return "i";
    return "0";
  }
};

namespace detail {

inline std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r') out.push_back(c);
  return out;
}

inline std::vector<std::string> split_terms(const std::string& s) {
  std::vector<std::string> terms;
  std::string cur;
  for (char c : s) {
    if (c == '+') {
      terms.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  terms.push_back(cur);
  return terms;
}

// Parses "1", "t", "t^k", "t^-k" into an exponent.
inline int parse_monomial_exponent(const std::string& term, std::string_view whole) {
  auto fail = [&]() -> int {
    throw std::invalid_argument("cannot parse ring element '" + std::string(whole) +
                                "': bad term '" + term + "'");
  };
  if (term == "1") return 0;
  if (term == "t") return 1;
  if (term.size() >= 3 && term[0] == 't' && term[1] == '^') {
    std::string num = term.substr(2);
    std::size_t start = (num[0] == '-') ? 1 : 0;
    if (start == num.size()) return fail();
    for (std::size_t i = start; i < num.size(); ++i)
      if (num[i] < '0' || num[i] > '9') return fail();
    try {
      return std::stoi(num);
    } catch (const std::exception&) {
      return fail();
    }
  }
  return fail();
}

inline std::string format_exponents(const std::vector<int>& exps) {
  if (exps.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    if (i) out += '+';
    out += "t^" + std::to_string(exps[i]);
  }
  return out;
}

}  // namespace detail

inline std::string F2Poly::str() const { return detail::format_exponents(exponents()); }
inline std::string F2Laurent::str() const { return detail::format_exponents(exponents()); }

// Parsing. Polynomial strings are sums of "t^k" terms (also "1" and "t");
// repeated terms cancel mod 2. The canonical printed form is ascending
// "t^0+t^3", with "0" for zero.
inline F2Laurent parse_laurent(std::string_view text) {
  std::string s = detail::strip_spaces(text);
  if (s.empty()) throw std::invalid_argument("cannot parse ring element: empty string");
  if (s == "0") return F2Laurent();
  auto terms = detail::split_terms(s);
  std::vector<int> exps;
  for (const auto& term : terms) exps.push_back(detail::parse_monomial_exponent(term, text));
  int lo = *std::min_element(exps.begin(), exps.end());
  F2Poly p;
  for (int e : exps) p.flip(e - lo);
  return F2Laurent(lo, p);
}

inline F2Poly parse_poly(std::string_view text) {
  F2Laurent l = parse_laurent(text);
  if (!l.is_polynomial())
    throw std::invalid_argument("cannot parse '" + std::string(text) +
                                "' as a polynomial: negative exponent");
  return l.to_poly();
}

inline Gf2 parse_gf2(std::string_view text) {
  std::string s = detail::strip_spaces(text);
  if (s == "0") return Gf2(false);
  if (s == "1") return Gf2(true);
  throw std::invalid_argument("cannot parse '" + std::string(text) + "' as an element of F2");
}

inline GroupRingElem parse_group_ring(std::string_view text) {
  std::string s = detail::strip_spaces(text);
  if (s.empty()) throw std::invalid_argument("cannot parse group ring element: empty string");
  GroupRingElem r;
  if (s == "0") return r;
  for (const auto& term : detail::split_terms(s)) {
    if (term == "1")
      r.a = !r.a;
    else if (term == "i")
      r.b = !r.b;
    else
      throw std::invalid_argument("cannot parse group ring element '" + std::string(text) +
                                  "': bad term '" + term + "'");
  }
  return r;
}

// Uniform access used by the generic matrix and complex code.
template <class R>
struct RingTraits;

template <>
struct RingTraits<Gf2> {
  static constexpr const char* name = "F2";
  static Gf2 zero() { return Gf2::zero(); }
  static Gf2 one() { return Gf2::one(); }
  static bool is_zero(const Gf2& x) { return x.is_zero(); }
  static std::string format(const Gf2& x) { return x.v ? "1" : "0"; }
  static Gf2 parse(std::string_view s) { return parse_gf2(s); }
};

template <>
struct RingTraits<F2Poly> {
  static constexpr const char* name = "F2[t]";
  static F2Poly zero() { return F2Poly::zero(); }
  static F2Poly one() { return F2Poly::one(); }
  static bool is_zero(const F2Poly& x) { return x.is_zero(); }
  static std::string format(const F2Poly& x) { return x.str(); }
  static F2Poly parse(std::string_view s) { return parse_poly(s); }
};

template <>
struct RingTraits<F2Laurent> {
  static constexpr const char* name = "F2[t,t^-1]";
  static F2Laurent zero() { return F2Laurent::zero(); }
  static F2Laurent one() { return F2Laurent::one(); }
  static bool is_zero(const F2Laurent& x) { return x.is_zero(); }
  static std::string format(const F2Laurent& x) { return x.str(); }
  static F2Laurent parse(std::string_view s) { return parse_laurent(s); }
};

template <>
struct RingTraits<GroupRingElem> {
  static constexpr const char* name = "F2[Z/2]";
  static GroupRingElem zero() { return GroupRingElem::zero(); }
  static GroupRingElem one() { return GroupRingElem::one(); }
  static bool is_zero(const GroupRingElem& x) { return x.is_zero(); }
  static std::string format(const GroupRingElem& x) { return x.str(); }
  static GroupRingElem parse(std::string_view s) { return parse_group_ring(s); }
};

// Euclidean structure for the three PIDs.
template <class R>
struct Euclid;

template <>
struct Euclid<Gf2> {
  static long norm(const Gf2& x) { return x.is_zero() ? -1 : 0; }
  static std::pair<Gf2, Gf2> divmod(const Gf2& a, const Gf2& b) {
    if (b.is_zero()) throw std::domain_error("Gf2: division by zero");
    return {a, Gf2()};
  }
  static bool is_unit(const Gf2& x) { return x.v; }
  static Gf2 normalize(const Gf2& x) { return x; }
  // Unit u with u*x normalized.
  static Gf2 normalizing_unit(const Gf2&) { return Gf2::one(); }
  static Gf2 unit_inverse(const Gf2& u) { return u; }
};

template <>
struct Euclid<F2Poly> {
  static long norm(const F2Poly& x) { return x.degree(); }
  static std::pair<F2Poly, F2Poly> divmod(const F2Poly& a, const F2Poly& b) {
    return polarfloer::divmod(a, b);
  }
  static bool is_unit(const F2Poly& x) { return x.is_one(); }
  static F2Poly normalize(const F2Poly& x) { return x; }
  static F2Poly normalizing_unit(const F2Poly&) { return F2Poly::one(); }
  static F2Poly unit_inverse(const F2Poly& u) { return u; }
};

template <>
struct Euclid<F2Laurent> {
  static long norm(const F2Laurent& x) { return x.span(); }
  static std::pair<F2Laurent, F2Laurent> divmod(const F2Laurent& a, const F2Laurent& b) {
    return polarfloer::divmod(a, b);
  }
  static bool is_unit(const F2Laurent& x) { return x.is_unit(); }
  static F2Laurent normalize(const F2Laurent& x) { return F2Laurent(x.normalized_poly()); }
  static F2Laurent normalizing_unit(const F2Laurent& x) {
    return F2Laurent::monomial(-x.min_exponent());
  }
  static F2Laurent unit_inverse(const F2Laurent& u) { return u.inverse_unit(); }
};

// q with p*q = 1 mod t^(order+1). Requires p(0) = 1.
inline F2Poly laurent_inverse_series(const F2Poly& p, int order) {
  if (!p.coeff(0)) throw std::invalid_argument("laurent_inverse_series: constant term must be 1");
  if (order < 0) throw std::invalid_argument("laurent_inverse_series: negative order");
  F2Poly q;
  // Coefficient k of p*q must vanish for 1 <= k <= order.
  for (int k = 0; k <= order; ++k) {
    bool c = (k == 0);
    for (int j = 1; j <= k; ++j)
      if (p.coeff(j) && q.coeff(k - j)) c = !c;
    if (c) q.flip(k);
  }
  return q;
}

}  // namespace polarfloer
