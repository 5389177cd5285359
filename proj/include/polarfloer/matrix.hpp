// Dense matrices over the coefficient rings, and GF(2) linear algebra on
// packed bitvectors.
#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "polarfloer/rings.hpp"

namespace polarfloer {

// Column j holds the image of basis vector j: entry (i, j) is the coefficient
// of generator i in the image of generator j.
template <class R>
class RingMatrix {
 public:
  RingMatrix() = default;
  RingMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, RingTraits<R>::zero()) {}

  static RingMatrix zero(std::size_t rows, std::size_t cols) { return RingMatrix(rows, cols); }
  static RingMatrix identity(std::size_t n) {
    RingMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = RingTraits<R>::one();
    return m;
  }
  static RingMatrix scalar(std::size_t n, const R& c) {
    RingMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = c;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  R& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const R& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  bool is_zero() const {
    for (const R& x : a_)
      if (!RingTraits<R>::is_zero(x)) return false;
    return true;
  }
  std::size_t nonzero_count() const {
    std::size_t c = 0;
    for (const R& x : a_)
      if (!RingTraits<R>::is_zero(x)) ++c;
    return c;
  }

  RingMatrix transpose() const {
    RingMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend RingMatrix operator+(const RingMatrix& x, const RingMatrix& y) {
    check_same(x, y, "+");
    RingMatrix r = x;
    for (std::size_t k = 0; k < r.a_.size(); ++k) r.a_[k] = r.a_[k] + y.a_[k];
    return r;
  }
  friend RingMatrix operator-(const RingMatrix& x, const RingMatrix& y) { return x + y; }
  RingMatrix& operator+=(const RingMatrix& y) { return *this = *this + y; }

  friend RingMatrix operator*(const RingMatrix& x, const RingMatrix& y) {
    if (x.cols_ != y.rows_)
      throw std::invalid_argument("matrix product: dimension mismatch " + x.shape() + " * " +
                                  y.shape());
    RingMatrix r(x.rows_, y.cols_);
    for (std::size_t i = 0; i < x.rows_; ++i)
      for (std::size_t k = 0; k < x.cols_; ++k) {
        const R& a = x(i, k);
        if (RingTraits<R>::is_zero(a)) continue;
        for (std::size_t j = 0; j < y.cols_; ++j) {
          const R& b = y(k, j);
          if (RingTraits<R>::is_zero(b)) continue;
          r(i, j) = r(i, j) + a * b;
        }
      }
    return r;
  }
  friend RingMatrix operator*(const R& c, const RingMatrix& x) {
    RingMatrix r = x;
    for (auto& e : r.a_) e = c * e;
    return r;
  }

  std::vector<R> apply(const std::vector<R>& v) const {
    if (v.size() != cols_) throw std::invalid_argument("matrix apply: dimension mismatch");
    std::vector<R> out(rows_, RingTraits<R>::zero());
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) {
        const R& a = (*this)(i, j);
        if (RingTraits<R>::is_zero(a) || RingTraits<R>::is_zero(v[j])) continue;
        out[i] = out[i] + a * v[j];
      }
    return out;
  }
  std::vector<R> column(std::size_t j) const {
    std::vector<R> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  RingMatrix submatrix(const std::vector<std::size_t>& rs, const std::vector<std::size_t>& cs) const {
    RingMatrix m(rs.size(), cs.size());
    for (std::size_t i = 0; i < rs.size(); ++i)
      for (std::size_t j = 0; j < cs.size(); ++j) m(i, j) = (*this)(rs[i], cs[j]);
    return m;
  }
  // Writes b into this matrix with its top-left corner at (r0, c0).
  void place(std::size_t r0, std::size_t c0, const RingMatrix& b) {
    if (r0 + b.rows_ > rows_ || c0 + b.cols_ > cols_)
      throw std::invalid_argument("matrix place: block does not fit");
    for (std::size_t i = 0; i < b.rows_; ++i)
      for (std::size_t j = 0; j < b.cols_; ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  template <class S, class F>
  RingMatrix<S> map(F f) const {
    RingMatrix<S> m(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(i, j) = f((*this)(i, j));
    return m;
  }

  friend bool operator==(const RingMatrix& x, const RingMatrix& y) {
    return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_;
  }

  std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }
  std::string str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < rows_; ++i) {
      os << "[";
      for (std::size_t j = 0; j < cols_; ++j) {
        if (j) os << ", ";
        os << RingTraits<R>::format((*this)(i, j));
      }
      os << "]\n";
    }
    return os.str();
  }

 private:
  static void check_same(const RingMatrix& x, const RingMatrix& y, const char* op) {
    if (x.rows_ != y.rows_ || x.cols_ != y.cols_)
      throw std::invalid_argument(std::string("matrix ") + op + ": dimension mismatch " +
                                  x.shape() + " vs " + y.shape());
  }
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<R> a_;
};

// [[a, b], [c, d]] block matrix.
template <class R>
RingMatrix<R> block2(const RingMatrix<R>& a, const RingMatrix<R>& b, const RingMatrix<R>& c,
                     const RingMatrix<R>& d) {
  if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() || b.cols() != d.cols())
    throw std::invalid_argument("block2: inconsistent block shapes");
  RingMatrix<R> m(a.rows() + c.rows(), a.cols() + b.cols());
  m.place(0, 0, a);
  m.place(0, a.cols(), b);
  m.place(a.rows(), 0, c);
  m.place(a.rows(), a.cols(), d);
  return m;
}

template <class R>
RingMatrix<R> direct_sum(const RingMatrix<R>& a, const RingMatrix<R>& b) {
  return block2(a, RingMatrix<R>(a.rows(), b.cols()), RingMatrix<R>(b.rows(), a.cols()), b);
}

// Kronecker product with index (i, j) -> i * b.size + j.
template <class R>
RingMatrix<R> kron(const RingMatrix<R>& a, const RingMatrix<R>& b) {
  RingMatrix<R> m(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (RingTraits<R>::is_zero(a(i, j))) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          m(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    }
  return m;
}

template <class R>
RingMatrix<R> matrix_power(const RingMatrix<R>& m, int k) {
  RingMatrix<R> r = RingMatrix<R>::identity(m.rows());
  for (int i = 0; i < k; ++i) r = r * m;
  return r;
}

using F2Matrix = RingMatrix<Gf2>;

// ---------------------------------------------------------------------------
// GF(2) vectors packed into 64-bit words.

class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  std::size_t size() const { return n_; }
  bool get(std::size_t i) const { return (w_[i / 64] >> (i % 64)) & 1U; }
  void set(std::size_t i, bool b) {
    std::uint64_t m = std::uint64_t{1} << (i % 64);
    if (b)
      w_[i / 64] |= m;
    else
      w_[i / 64] &= ~m;
  }
  void flip(std::size_t i) { w_[i / 64] ^= std::uint64_t{1} << (i % 64); }
  BitVec& operator+=(const BitVec& o) {
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] ^= o.w_[k];
    return *this;
  }
  friend BitVec operator+(BitVec a, const BitVec& b) { return a += b; }
  bool is_zero() const {
    for (auto x : w_)
      if (x) return false;
    return true;
  }
  // Index of the lowest set bit, or size() if zero.
  std::size_t first() const {
    for (std::size_t k = 0; k < w_.size(); ++k)
      if (w_[k]) return k * 64 + static_cast<std::size_t>(std::countr_zero(w_[k]));
    return n_;
  }
  std::size_t popcount() const {
    std::size_t c = 0;
    for (auto x : w_) c += static_cast<std::size_t>(std::popcount(x));
    return c;
  }
  bool dot(const BitVec& o) const {
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < w_.size(); ++k) acc ^= w_[k] & o.w_[k];
    return std::popcount(acc) & 1;
  }
  friend bool operator==(const BitVec&, const BitVec&) = default;

  static BitVec from_gf2(const std::vector<Gf2>& v) {
    BitVec b(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i].v) b.set(i, true);
    return b;
  }
  std::vector<Gf2> to_gf2() const {
    std::vector<Gf2> v(n_);
    for (std::size_t i = 0; i < n_; ++i) v[i] = Gf2(get(i));
    return v;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

inline std::vector<BitVec> columns_of(const F2Matrix& m) {
  std::vector<BitVec> cols(m.cols(), BitVec(m.rows()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j).v) cols[j].set(i, true);
  return cols;
}

inline F2Matrix matrix_from_columns(const std::vector<BitVec>& cols, std::size_t rows) {
  F2Matrix m(rows, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows; ++i)
      if (cols[j].get(i)) m(i, j) = Gf2(true);
  return m;
}

// Incremental echelon basis of a subspace of F2^n. Each inserted vector is
// recorded with its expression in terms of the inserted generators, so that
// membership queries also return coordinates.
class F2Span {
 public:
  explicit F2Span(std::size_t n = 0) : n_(n) {}

  std::size_t ambient() const { return n_; }
  std::size_t dim() const { return rows_.size(); }
  std::size_t generators() const { return gens_; }

  // Adds v as a new generator; returns true if it enlarged the span.
  bool insert(const BitVec& v) {
    std::size_t id = gens_++;
    ensure_combo_capacity(id + 1);
    BitVec r = v;
    BitVec combo(combo_cap_);
    combo.set(id, true);
    reduce_in_place(r, combo);
    if (r.is_zero()) return false;
    std::size_t p = r.first();
    rows_.push_back(r);
    combos_.push_back(combo);
    pivots_.push_back(p);
    return true;
  }
  bool contains(const BitVec& v) const {
    BitVec r = v;
    BitVec combo(combo_cap_);
    reduce_in_place(r, combo);
    return r.is_zero();
  }
  // Coefficients c over the inserted generators with v = sum c_k g_k.
  std::optional<std::vector<bool>> coordinates(const BitVec& v) const {
    BitVec r = v;
    BitVec combo(combo_cap_);
    reduce_in_place(r, combo);
    if (!r.is_zero()) return std::nullopt;
    std::vector<bool> c(gens_);
    for (std::size_t k = 0; k < gens_; ++k) c[k] = combo.get(k);
    return c;
  }
  // Remainder of v after reduction by the span.
  BitVec residue(const BitVec& v) const {
    BitVec r = v;
    BitVec combo(combo_cap_);
    reduce_in_place(r, combo);
    return r;
  }

 private:
  static constexpr std::size_t kMaxGen = 64;
  void ensure_combo_capacity(std::size_t need) {
    if (need <= combo_cap_) return;
    std::size_t cap = std::max<std::size_t>(kMaxGen, combo_cap_ * 2);
    while (cap < need) cap *= 2;
    for (auto& c : combos_) {
      BitVec grown(cap);
      for (std::size_t k = 0; k < combo_cap_; ++k)
        if (c.get(k)) grown.set(k, true);
      c = grown;
    }
    combo_cap_ = cap;
  }
  void reduce_in_place(BitVec& r, BitVec& combo) const {
    for (std::size_t k = 0; k < rows_.size(); ++k)
      if (r.get(pivots_[k])) {
        r += rows_[k];
        combo += combos_[k];
      }
  }
  // Each row is reduced against the earlier rows only; reducing in insertion
  // order is then exact.
  std::size_t n_;
  std::size_t gens_ = 0;
  std::size_t combo_cap_ = 0;
  std::vector<BitVec> rows_;
  std::vector<BitVec> combos_;
  std::vector<std::size_t> pivots_;
};

// Row-reduced form of a GF(2) matrix with pivot columns; used for rank,
// kernel and image computations.
struct F2Reduction {
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_cols;
  std::vector<BitVec> rows;  // reduced rows (length = cols), rank of them nonzero
};

inline F2Reduction f2_row_reduce(const F2Matrix& m) {
  std::vector<BitVec> rows(m.rows(), BitVec(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j).v) rows[i].set(j, true);
  F2Reduction red;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < rows.size(); ++c) {
    std::size_t p = r;
    while (p < rows.size() && !rows[p].get(c)) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[r]);
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (i != r && rows[i].get(c)) rows[i] += rows[r];
    red.pivot_cols.push_back(c);
    ++r;
  }
  red.rank = r;
  rows.resize(r);
  red.rows = std::move(rows);
  return red;
}

inline std::size_t f2_rank(const F2Matrix& m) { return f2_row_reduce(m).rank; }

// Basis of {x : m x = 0}.
inline std::vector<BitVec> f2_kernel_basis(const F2Matrix& m) {
  F2Reduction red = f2_row_reduce(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto c : red.pivot_cols) is_pivot[c] = true;
  std::vector<BitVec> basis;
  for (std::size_t f = 0; f < m.cols(); ++f) {
    if (is_pivot[f]) continue;
    BitVec v(m.cols());
    v.set(f, true);
    for (std::size_t k = 0; k < red.rank; ++k)
      if (red.rows[k].get(f)) v.set(red.pivot_cols[k], true);
    basis.push_back(v);
  }
  return basis;
}

// Basis of the column space of m (a subset of its columns).
inline std::vector<BitVec> f2_image_basis(const F2Matrix& m) {
  F2Reduction red = f2_row_reduce(m);
  auto cols = columns_of(m);
  std::vector<BitVec> basis;
  for (auto c : red.pivot_cols) basis.push_back(cols[c]);
  return basis;
}

// Solves m x = b, if solvable.
inline std::optional<BitVec> f2_solve(const F2Matrix& m, const BitVec& b) {
  F2Span span(m.rows());
  auto cols = columns_of(m);
  for (const auto& c : cols) span.insert(c);
  auto coords = span.coordinates(b);
  if (!coords) return std::nullopt;
  BitVec x(m.cols());
  for (std::size_t k = 0; k < m.cols(); ++k)
    if ((*coords)[k]) x.set(k, true);
  return x;
}

}  // namespace polarfloer
