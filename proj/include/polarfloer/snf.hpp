// Smith normal form over a Euclidean ring (GF(2), F2[t], F2[t,t^-1]).
#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "polarfloer/matrix.hpp"
#include "polarfloer/rings.hpp"

namespace polarfloer {

enum SnfTrack : unsigned {
  kTrackNone = 0,
  kTrackU = 1,
  kTrackV = 2,
  kTrackUInv = 4,
  kTrackVInv = 8,
  kTrackAll = 15,
};

template <class R>
struct SmithForm {
  // U * m * V = diag(factors, 0, ...). Inverses are filled when tracked.
  RingMatrix<R> U, V, U_inv, V_inv;
  std::vector<R> factors;  // normalized, each dividing the next
  std::size_t rank = 0;
  std::size_t rows = 0, cols = 0;

  RingMatrix<R> diagonal() const {
    RingMatrix<R> d(rows, cols);
    for (std::size_t k = 0; k < factors.size(); ++k) d(k, k) = factors[k];
    return d;
  }
};

namespace detail {

template <class R>
class SnfWorker {
 public:
  SnfWorker(const RingMatrix<R>& m, unsigned track)
      : a_(m), r_(m.rows()), c_(m.cols()), track_(track) {
    if (track_ & kTrackU) u_ = RingMatrix<R>::identity(r_);
    if (track_ & kTrackUInv) ui_ = RingMatrix<R>::identity(r_);
    if (track_ & kTrackV) v_ = RingMatrix<R>::identity(c_);
    if (track_ & kTrackVInv) vi_ = RingMatrix<R>::identity(c_);
  }

  SmithForm<R> run() {
    SmithForm<R> out;
    out.rows = r_;
    out.cols = c_;
    for (;;) {
      // Column pass first: a row pass would undo the merge made by fix_divisibility.
      while (!is_diagonal()) {
        col_hermite();
        if (is_diagonal()) break;
        row_hermite();
      }
      if (!fix_divisibility()) break;
    }
    std::size_t n = std::min(r_, c_);
    for (std::size_t t = 0; t < n && !RingTraits<R>::is_zero(a_(t, t)); ++t) {
      R u = Euclid<R>::normalizing_unit(a_(t, t));
      if (!(u == RingTraits<R>::one())) row_scale(t, u);
      out.factors.push_back(a_(t, t));
      ++out.rank;
    }
    out.U = std::move(u_);
    out.V = std::move(v_);
    out.U_inv = std::move(ui_);
    out.V_inv = std::move(vi_);
    return out;
  }

 private:
  // Diagonal with the nonzero entries leading.
  bool is_diagonal() const {
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < c_; ++j)
        if (i != j && !RingTraits<R>::is_zero(a_(i, j))) return false;
    bool zero_seen = false;
    for (std::size_t k = 0; k < std::min(r_, c_); ++k) {
      bool z = RingTraits<R>::is_zero(a_(k, k));
      if (!z && zero_seen) return false;
      zero_seen = zero_seen || z;
    }
    return true;
  }

  bool divides(const R& a, const R& b) const {
    return RingTraits<R>::is_zero(b) || RingTraits<R>::is_zero(Euclid<R>::divmod(b, a).second);
  }

  // On a diagonal matrix, merges the first pair a_k, a_l (k < l) with a_k not
  // dividing a_l into row k; the next Hermite rounds replace a_k by the gcd.
  bool fix_divisibility() {
    std::size_t n = std::min(r_, c_);
    for (std::size_t k = 0; k < n; ++k) {
      if (RingTraits<R>::is_zero(a_(k, k))) continue;
      for (std::size_t l = k + 1; l < n; ++l)
        if (!divides(a_(k, k), a_(l, l))) {
          row_add(k, l, RingTraits<R>::one());
          return true;
        }
    }
    return false;
  }

  // Row echelon form with entries above each pivot reduced modulo the pivot.
  void row_hermite() {
    std::size_t p = 0;
    for (std::size_t c = 0; c < c_ && p < r_; ++c) {
      for (;;) {
        std::size_t best = r_;
        for (std::size_t i = p; i < r_; ++i)
          if (!RingTraits<R>::is_zero(a_(i, c)) &&
              (best == r_ || Euclid<R>::norm(a_(i, c)) < Euclid<R>::norm(a_(best, c))))
            best = i;
        if (best == r_) break;
        if (best != p) row_swap(best, p);
        bool clear = true;
        for (std::size_t i = p + 1; i < r_; ++i) {
          if (RingTraits<R>::is_zero(a_(i, c))) continue;
          auto [q, rem] = Euclid<R>::divmod(a_(i, c), a_(p, c));
          row_add(i, p, q);
          if (!RingTraits<R>::is_zero(rem)) clear = false;
        }
        if (clear) break;
      }
      if (RingTraits<R>::is_zero(a_(p, c))) continue;
      for (std::size_t i = 0; i < p; ++i)
        if (!RingTraits<R>::is_zero(a_(i, c))) row_add(i, p, Euclid<R>::divmod(a_(i, c), a_(p, c)).first);
      ++p;
    }
  }

  // Column version of row_hermite.
  void col_hermite() {
    std::size_t p = 0;
    for (std::size_t r = 0; r < r_ && p < c_; ++r) {
      for (;;) {
        std::size_t best = c_;
        for (std::size_t j = p; j < c_; ++j)
          if (!RingTraits<R>::is_zero(a_(r, j)) &&
              (best == c_ || Euclid<R>::norm(a_(r, j)) < Euclid<R>::norm(a_(r, best))))
            best = j;
        if (best == c_) break;
        if (best != p) col_swap(best, p);
        bool clear = true;
        for (std::size_t j = p + 1; j < c_; ++j) {
          if (RingTraits<R>::is_zero(a_(r, j))) continue;
          auto [q, rem] = Euclid<R>::divmod(a_(r, j), a_(r, p));
          col_add(j, p, q);
          if (!RingTraits<R>::is_zero(rem)) clear = false;
        }
        if (clear) break;
      }
      if (RingTraits<R>::is_zero(a_(r, p))) continue;
      for (std::size_t j = 0; j < p; ++j)
        if (!RingTraits<R>::is_zero(a_(r, j))) col_add(j, p, Euclid<R>::divmod(a_(r, j), a_(r, p)).first);
      ++p;
    }
  }

  // row_i += q * row_k
  void row_add(std::size_t i, std::size_t k, const R& q) {
    if (RingTraits<R>::is_zero(q)) return;
    for (std::size_t j = 0; j < c_; ++j)
      if (!RingTraits<R>::is_zero(a_(k, j))) a_(i, j) = a_(i, j) + q * a_(k, j);
    if (track_ & kTrackU)
      for (std::size_t j = 0; j < r_; ++j)
        if (!RingTraits<R>::is_zero(u_(k, j))) u_(i, j) = u_(i, j) + q * u_(k, j);
    if (track_ & kTrackUInv)
      for (std::size_t j = 0; j < r_; ++j)
        if (!RingTraits<R>::is_zero(ui_(j, i))) ui_(j, k) = ui_(j, k) + q * ui_(j, i);
  }
  void row_swap(std::size_t i, std::size_t k) {
    for (std::size_t j = 0; j < c_; ++j) std::swap(a_(i, j), a_(k, j));
    if (track_ & kTrackU)
      for (std::size_t j = 0; j < r_; ++j) std::swap(u_(i, j), u_(k, j));
    if (track_ & kTrackUInv)
      for (std::size_t j = 0; j < r_; ++j) std::swap(ui_(j, i), ui_(j, k));
  }
  void row_scale(std::size_t i, const R& u) {
    R inv = Euclid<R>::unit_inverse(u);
    for (std::size_t j = 0; j < c_; ++j) a_(i, j) = u * a_(i, j);
    if (track_ & kTrackU)
      for (std::size_t j = 0; j < r_; ++j) u_(i, j) = u * u_(i, j);
    if (track_ & kTrackUInv)
      for (std::size_t j = 0; j < r_; ++j) ui_(j, i) = ui_(j, i) * inv;
  }
  // col_j += q * col_k
  void col_add(std::size_t j, std::size_t k, const R& q) {
    if (RingTraits<R>::is_zero(q)) return;
    for (std::size_t i = 0; i < r_; ++i)
      if (!RingTraits<R>::is_zero(a_(i, k))) a_(i, j) = a_(i, j) + q * a_(i, k);
    if (track_ & kTrackV)
      for (std::size_t i = 0; i < c_; ++i)
        if (!RingTraits<R>::is_zero(v_(i, k))) v_(i, j) = v_(i, j) + q * v_(i, k);
    if (track_ & kTrackVInv)
      for (std::size_t i = 0; i < c_; ++i)
        if (!RingTraits<R>::is_zero(vi_(j, i))) vi_(k, i) = vi_(k, i) + q * vi_(j, i);
  }
  void col_swap(std::size_t j, std::size_t k) {
    for (std::size_t i = 0; i < r_; ++i) std::swap(a_(i, j), a_(i, k));
    if (track_ & kTrackV)
      for (std::size_t i = 0; i < c_; ++i) std::swap(v_(i, j), v_(i, k));
    if (track_ & kTrackVInv)
      for (std::size_t i = 0; i < c_; ++i) std::swap(vi_(j, i), vi_(k, i));
  }

  RingMatrix<R> a_;
  std::size_t r_, c_;
  unsigned track_;
  RingMatrix<R> u_, v_, ui_, vi_;
};

}  // namespace detail

// Alternates reduced row and column Hermite forms until the matrix is
// diagonal, then restores the divisibility chain. Reducing above each pivot
// keeps the degrees of the transforms bounded.
template <class R>
SmithForm<R> smith_normal_form(const RingMatrix<R>& m, unsigned track = kTrackAll) {
  return detail::SnfWorker<R>(m, track).run();
}

inline SmithForm<F2Poly> snf_f2t(const RingMatrix<F2Poly>& m) { return smith_normal_form(m); }

inline std::vector<F2Laurent> snf_laurent(const RingMatrix<F2Laurent>& m) {
  return smith_normal_form(m, kTrackNone).factors;
}

template <class R>
std::vector<R> invariant_factors(const RingMatrix<R>& m) {
  return smith_normal_form(m, kTrackNone).factors;
}

// Inverse of a square matrix that is invertible over R.
template <class R>
RingMatrix<R> unimodular_inverse(const RingMatrix<R>& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("unimodular_inverse: matrix not square");
  auto s = smith_normal_form(m, kTrackU | kTrackV);
  if (s.rank != m.rows()) throw std::domain_error("unimodular_inverse: matrix is singular");
  for (const R& f : s.factors)
    if (!Euclid<R>::is_unit(f)) throw std::domain_error("unimodular_inverse: not invertible over the ring");
  return s.V * s.U;
}

template <class R>
bool is_invertible(const RingMatrix<R>& m) {
  if (m.rows() != m.cols()) return false;
  auto f = invariant_factors(m);
  if (f.size() != m.rows()) return false;
  for (const R& x : f)
    if (!Euclid<R>::is_unit(x)) return false;
  return true;
}

// Invariant factors of a direct sum of cyclic modules R/(f_i).
template <class R>
std::vector<R> combine_cyclic(const std::vector<R>& fs) {
  RingMatrix<R> d(fs.size(), fs.size());
  for (std::size_t k = 0; k < fs.size(); ++k) d(k, k) = fs[k];
  return invariant_factors(d);
}

}  // namespace polarfloer
