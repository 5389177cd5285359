// Finite free chain complexes over GF(2), F2[t], F2[t,t^-1] and F2[Z/2]:
// validation, homology, cones, tensor products, homotopies and the spectral
// sequence of a finite filtration.
//
// Conventions: cohomological grading, d has degree +1, deg t = 1, deg iota = 0.
// Cones list source generators first (degree shifted by -1), then target
// generators; d_cone = [[d_src, 0], [f, d_tgt]].
#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "polarfloer/matrix.hpp"
#include "polarfloer/rings.hpp"
#include "polarfloer/snf.hpp"

namespace polarfloer {

class ComplexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class R>
inline constexpr bool kIsPid = std::is_same_v<R, Gf2> || std::is_same_v<R, F2Poly> ||
                               std::is_same_v<R, F2Laurent>;

namespace detail {

// Degree of a homogeneous ring element; nullopt if it is not homogeneous.
template <class R>
std::optional<int> homogeneous_degree(const R& x) {
  if constexpr (std::is_same_v<R, Gf2> || std::is_same_v<R, GroupRingElem>) {
    return 0;
  } else {
    auto e = x.exponents();
    if (e.size() != 1) return std::nullopt;
    return e[0];
  }
}

template <class R>
bool coefficient_at(const R& x, int e) {
  if constexpr (std::is_same_v<R, Gf2>) {
    return e == 0 && x.v;
  } else {
    return x.coeff(e);
  }
}

}  // namespace detail

template <class R>
class FreeComplex {
 public:
  FreeComplex() = default;
  FreeComplex(std::vector<std::string> labels, RingMatrix<R> d,
              std::optional<std::vector<int>> grading = std::nullopt,
              std::optional<std::vector<int>> levels = std::nullopt)
      : labels_(std::move(labels)),
        d_(std::move(d)),
        grading_(std::move(grading)),
        levels_(std::move(levels)) {
    validate();
  }

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const RingMatrix<R>& d() const { return d_; }
  bool graded() const { return grading_.has_value(); }
  const std::vector<int>& grading() const { return *grading_; }
  bool filtered() const { return levels_.has_value(); }
  const std::vector<int>& levels() const { return *levels_; }

  FreeComplex with_levels(std::vector<int> levels) const {
    return FreeComplex(labels_, d_, grading_, std::move(levels));
  }
  FreeComplex without_grading() const { return FreeComplex(labels_, d_, std::nullopt, levels_); }

 private:
  void validate() const {
    std::size_t n = labels_.size();
    if (d_.rows() != n || d_.cols() != n)
      throw ComplexError("differential is " + d_.shape() + " but there are " +
                         std::to_string(n) + " generators");
    if (grading_ && grading_->size() != n) throw ComplexError("grading has the wrong length");
    if (levels_ && levels_->size() != n) throw ComplexError("filtration has the wrong length");
    RingMatrix<R> dd = d_ * d_;
    if (!dd.is_zero()) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (!RingTraits<R>::is_zero(dd(i, j)))
            throw ComplexError("d*d != 0: entry (" + labels_[i] + ", " + labels_[j] + ") is " +
                               RingTraits<R>::format(dd(i, j)));
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const R& x = d_(i, j);
        if (RingTraits<R>::is_zero(x)) continue;
        if (grading_) {
          auto e = detail::homogeneous_degree(x);
          if (!e || (*grading_)[i] + *e != (*grading_)[j] + 1)
            throw ComplexError("differential entry " + labels_[j] + " -> " + labels_[i] +
                               " (" + RingTraits<R>::format(x) + ") does not raise degree by 1");
        }
        if (levels_ && (*levels_)[i] < (*levels_)[j])
          throw ComplexError("differential entry " + labels_[j] + " -> " + labels_[i] +
                             " lowers the filtration level");
      }
  }

  std::vector<std::string> labels_;
  RingMatrix<R> d_;
  std::optional<std::vector<int>> grading_;
  std::optional<std::vector<int>> levels_;
};

using F2Complex = FreeComplex<Gf2>;
using PolyComplex = FreeComplex<F2Poly>;
using LaurentComplex = FreeComplex<F2Laurent>;

template <class R>
struct ChainMap {
  FreeComplex<R> source;
  FreeComplex<R> target;
  RingMatrix<R> f;

  ChainMap() = default;
  ChainMap(FreeComplex<R> s, FreeComplex<R> t, RingMatrix<R> m)
      : source(std::move(s)), target(std::move(t)), f(std::move(m)) {
    if (f.rows() != target.size() || f.cols() != source.size())
      throw ComplexError("chain map matrix is " + f.shape() + ", expected " +
                         std::to_string(target.size()) + "x" + std::to_string(source.size()));
    if (!(f * source.d() == target.d() * f)) throw ComplexError("map does not commute with d");
  }
};

template <class R>
bool is_chain_map(const FreeComplex<R>& s, const FreeComplex<R>& t, const RingMatrix<R>& f) {
  if (f.rows() != t.size() || f.cols() != s.size()) return false;
  return f * s.d() == t.d() * f;
}

// ---------------------------------------------------------------------------
// Module reports.

template <class R>
struct ModuleReport {
  std::size_t free_rank = 0;
  std::vector<R> torsion;  // non-unit, nonzero, each dividing the next

  bool is_zero() const { return free_rank == 0 && torsion.empty(); }
  bool is_torsion() const { return free_rank == 0; }
  friend bool operator==(const ModuleReport&, const ModuleReport&) = default;

  std::string str() const {
    std::ostringstream os;
    os << "free " << free_rank;
    if (!torsion.empty()) {
      os << "; torsion";
      for (const R& f : torsion) os << " (" << RingTraits<R>::format(f) << ")";
    }
    return os.str();
  }
};

template <class R>
ModuleReport<R> report_from_factors(std::size_t free_rank, const std::vector<R>& factors) {
  ModuleReport<R> rep;
  rep.free_rank = free_rank;
  for (const R& f : factors)
    if (!Euclid<R>::is_unit(f)) rep.torsion.push_back(f);
  return rep;
}

// Report of a direct sum.
template <class R>
ModuleReport<R> combine_reports(const std::vector<ModuleReport<R>>& parts) {
  ModuleReport<R> out;
  std::vector<R> all;
  for (const auto& p : parts) {
    out.free_rank += p.free_rank;
    all.insert(all.end(), p.torsion.begin(), p.torsion.end());
  }
  if (all.empty()) return out;
  for (const R& f : combine_cyclic(all))
    if (!Euclid<R>::is_unit(f)) out.torsion.push_back(f);
  return out;
}

// Invariant factors of ker(d)/im(d).
template <class R>
ModuleReport<R> homology(const FreeComplex<R>& c) {
  if constexpr (!kIsPid<R>) {
    throw ComplexError(
        "homology over F2[Z/2] is not supported (not a PID); apply a_f2 or borel first");
  } else {
    auto factors = invariant_factors(c.d());
    std::size_t r = factors.size();
    return report_from_factors<R>(c.size() - 2 * r, factors);
  }
}

// F2-dimension of the degree-k part of homology for k in [lo, hi]. For F2[t]
// the degree-k part of the free module is spanned by t^(k-g) x with k >= g;
// over F2[t,t^-1] every generator contributes.
template <class R>
std::map<int, std::size_t> degree_dims(const FreeComplex<R>& c, int lo, int hi) {
  static_assert(kIsPid<R>, "degree_dims needs a PID coefficient ring");
  if (!c.graded()) throw ComplexError("degree_dims: complex is not graded");
  const auto& g = c.grading();
  auto part = [&](int k) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if constexpr (std::is_same_v<R, Gf2>) {
        if (g[i] == k) idx.push_back(i);
      } else if constexpr (std::is_same_v<R, F2Poly>) {
        if (g[i] <= k) idx.push_back(i);
      } else {
        idx.push_back(i);
      }
    }
    return idx;
  };
  auto dk = [&](int k) {
    auto src = part(k), tgt = part(k + 1);
    F2Matrix m(tgt.size(), src.size());
    for (std::size_t a = 0; a < tgt.size(); ++a)
      for (std::size_t b = 0; b < src.size(); ++b) {
        std::size_t i = tgt[a], j = src[b];
        const R& x = c.d()(i, j);
        if (RingTraits<R>::is_zero(x)) continue;
        if (detail::coefficient_at(x, 1 + g[j] - g[i])) m(a, b) = Gf2(true);
      }
    return m;
  };
  std::map<int, std::size_t> out;
  for (int k = lo; k <= hi; ++k) {
    std::size_t n = part(k).size();
    out[k] = n - f2_rank(dk(k)) - f2_rank(dk(k - 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constructions.

template <class R>
FreeComplex<R> cone(const ChainMap<R>& m) {
  const auto& s = m.source;
  const auto& t = m.target;
  std::vector<std::string> labels;
  for (const auto& l : s.labels()) labels.push_back("src:" + l);
  for (const auto& l : t.labels()) labels.push_back("tgt:" + l);
  RingMatrix<R> d = block2(s.d(), RingMatrix<R>(s.size(), t.size()), m.f, t.d());
  std::optional<std::vector<int>> grading;
  if (s.graded() && t.graded()) {
    std::vector<int> g;
    for (int x : s.grading()) g.push_back(x - 1);
    for (int x : t.grading()) g.push_back(x);
    grading = g;
  }
  return FreeComplex<R>(std::move(labels), std::move(d), std::move(grading));
}

// Tensor product over R; generator (i, j) has index i * |B| + j.
template <class R>
FreeComplex<R> tensor(const FreeComplex<R>& a, const FreeComplex<R>& b) {
  std::vector<std::string> labels;
  for (const auto& x : a.labels())
    for (const auto& y : b.labels()) labels.push_back(x + "*" + y);
  RingMatrix<R> d = kron(a.d(), RingMatrix<R>::identity(b.size())) +
                    kron(RingMatrix<R>::identity(a.size()), b.d());
  std::optional<std::vector<int>> grading;
  if (a.graded() && b.graded()) {
    std::vector<int> g;
    for (int x : a.grading())
      for (int y : b.grading()) g.push_back(x + y);
    grading = g;
  }
  return FreeComplex<R>(std::move(labels), std::move(d), std::move(grading));
}

template <class R>
FreeComplex<R> direct_sum(const FreeComplex<R>& a, const FreeComplex<R>& b) {
  std::vector<std::string> labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  std::optional<std::vector<int>> grading;
  if (a.graded() && b.graded()) {
    std::vector<int> g = a.grading();
    g.insert(g.end(), b.grading().begin(), b.grading().end());
    grading = g;
  }
  return FreeComplex<R>(std::move(labels), direct_sum(a.d(), b.d()), std::move(grading));
}

// True iff f + g = d_t h + h d_s.
template <class R>
bool verify_homotopy(const ChainMap<R>& f, const ChainMap<R>& g, const RingMatrix<R>& h) {
  if (f.f.rows() != g.f.rows() || f.f.cols() != g.f.cols())
    throw ComplexError("verify_homotopy: maps have different shapes");
  if (h.rows() != f.target.size() || h.cols() != f.source.size())
    throw ComplexError("verify_homotopy: homotopy has shape " + h.shape() + ", expected " +
                       f.f.shape());
  return f.f + g.f == f.target.d() * h + h * f.source.d();
}

// ---------------------------------------------------------------------------
// Submodule arithmetic over a PID via Smith normal form.

template <class R>
struct KernelBasis {
  RingMatrix<R> basis;   // n x k, columns span ker m (a direct summand)
  RingMatrix<R> coords;  // k x n, coords * z recovers coefficients of z in basis
};

template <class R>
KernelBasis<R> kernel_basis(const RingMatrix<R>& m) {
  auto s = smith_normal_form(m, kTrackV | kTrackVInv);
  std::size_t n = m.cols(), r = s.rank;
  std::vector<std::size_t> all(n), tail;
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (std::size_t i = r; i < n; ++i) tail.push_back(i);
  return {s.V.submatrix(all, tail), s.V_inv.submatrix(tail, all)};
}

// Report of span(basis)/span(gens), where each generator lies in the span of
// the basis; coordinates are taken with the supplied coordinate matrix.
template <class R>
ModuleReport<R> quotient_report(const KernelBasis<R>& z, const RingMatrix<R>& gens) {
  std::size_t k = z.basis.cols();
  if (gens.cols() == 0 || k == 0) return ModuleReport<R>{k, {}};
  RingMatrix<R> c = z.coords * gens;
  auto f = invariant_factors(c);
  return report_from_factors<R>(k - f.size(), f);
}

// ---------------------------------------------------------------------------
// Spectral sequence of the decreasing filtration F^p = span{x : level(x) >= p}.
//   Z_r^p = F^p ∩ d^-1(F^{p+r})
//   E_r^p = Z_r^p / (Z_{r-1}^{p+1} + d Z_{r-1}^{p-r+1})

template <class R>
struct SpectralPages {
  std::vector<ModuleReport<R>> pages;       // pages[r - 1] is E_r
  ModuleReport<R> e_infinity;
  std::optional<int> degeneration_page;     // first r with E_r = E_infinity
};

namespace detail {

template <class R>
class FiltrationCalculator {
 public:
  explicit FiltrationCalculator(const FreeComplex<R>& c) : c_(c) {
    const auto& lv = c.levels();
    lo_ = *std::min_element(lv.begin(), lv.end());
    hi_ = *std::max_element(lv.begin(), lv.end());
  }
  int lo() const { return lo_; }
  int hi() const { return hi_; }

  // Basis of Z_r^p as columns of an n-row matrix, with coordinates.
  KernelBasis<R> z(int r, int p) const {
    std::size_t n = c_.size();
    const auto& lv = c_.levels();
    std::vector<std::size_t> cols, rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (lv[i] >= p) cols.push_back(i);
      if (lv[i] < p + r) rows.push_back(i);
    }
    RingMatrix<R> m = c_.d().submatrix(rows, cols);
    KernelBasis<R> kb = kernel_basis(m);
    // Embed back into the full generator set.
    KernelBasis<R> out{RingMatrix<R>(n, kb.basis.cols()), RingMatrix<R>(kb.basis.cols(), n)};
    for (std::size_t a = 0; a < cols.size(); ++a)
      for (std::size_t k = 0; k < kb.basis.cols(); ++k) {
        out.basis(cols[a], k) = kb.basis(a, k);
        out.coords(k, cols[a]) = kb.coords(k, a);
      }
    return out;
  }

  ModuleReport<R> page_at(int r, int p) const {
    KernelBasis<R> zr = z(r, p);
    if (zr.basis.cols() == 0) return {};
    KernelBasis<R> a = z(r - 1, p + 1);
    KernelBasis<R> b = z(r - 1, p - r + 1);
    RingMatrix<R> db = c_.d() * b.basis;
    RingMatrix<R> gens(c_.size(), a.basis.cols() + db.cols());
    gens.place(0, 0, a.basis);
    gens.place(0, a.basis.cols(), db);
    return quotient_report(zr, gens);
  }

  ModuleReport<R> page(int r) const {
    std::vector<ModuleReport<R>> parts;
    for (int p = lo_; p <= hi_; ++p) parts.push_back(page_at(r, p));
    return combine_reports(parts);
  }

 private:
  const FreeComplex<R>& c_;
  int lo_ = 0, hi_ = 0;
};

}  // namespace detail

template <class R>
SpectralPages<R> spectral_pages(const FreeComplex<R>& c, int up_to_page) {
  static_assert(kIsPid<R>, "spectral_pages needs a PID coefficient ring");
  if (!c.filtered()) throw ComplexError("spectral_pages: complex has no filtration");
  if (up_to_page < 1) throw ComplexError("spectral_pages: page must be at least 1");
  SpectralPages<R> out;
  if (c.size() == 0) {
    out.pages.assign(static_cast<std::size_t>(up_to_page), {});
    out.degeneration_page = 1;
    return out;
  }
  detail::FiltrationCalculator<R> calc(c);
  int inf = calc.hi() - calc.lo() + 1;
  out.e_infinity = calc.page(inf);
  int last = std::max(up_to_page, inf);
  for (int r = 1; r <= last; ++r) {
    ModuleReport<R> e = r >= inf ? out.e_infinity : calc.page(r);
    if (r <= up_to_page) out.pages.push_back(e);
    if (!out.degeneration_page && e == out.e_infinity) out.degeneration_page = r;
    if (r >= up_to_page && out.degeneration_page) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Explicit homology over GF(2): representatives and coordinates.

class F2Homology {
 public:
  F2Homology() = default;
  explicit F2Homology(const F2Matrix& d) : n_(d.cols()), d_(d), span_(d.cols()) {
    for (const auto& b : f2_image_basis(d)) {
      span_.insert(b);
      ++boundary_gens_;
    }
    for (const auto& z : f2_kernel_basis(d)) {
      std::size_t id = span_.generators();
      if (span_.insert(z)) {
        reps_.push_back(z);
        rep_ids_.push_back(id);
      }
    }
  }

  std::size_t ambient() const { return n_; }
  std::size_t dim() const { return reps_.size(); }
  const std::vector<BitVec>& representatives() const { return reps_; }

  bool is_cycle(const BitVec& v) const {
    for (std::size_t i = 0; i < d_.rows(); ++i) {
      bool acc = false;
      for (std::size_t j = 0; j < n_; ++j)
        if (d_(i, j).v && v.get(j)) acc = !acc;
      if (acc) return false;
    }
    return true;
  }

  // Coordinates of the class of a cycle in the representative basis.
  BitVec coordinates(const BitVec& cycle) const {
    auto c = span_.coordinates(cycle);
    if (!c) throw ComplexError("F2Homology::coordinates: vector is not a cycle");
    BitVec out(reps_.size());
    for (std::size_t k = 0; k < rep_ids_.size(); ++k)
      if ((*c)[rep_ids_[k]]) out.set(k, true);
    return out;
  }

 private:
  std::size_t n_ = 0;
  F2Matrix d_;
  F2Span span_;
  std::size_t boundary_gens_ = 0;
  std::vector<BitVec> reps_;
  std::vector<std::size_t> rep_ids_;
};

inline BitVec apply_f2(const F2Matrix& f, const BitVec& v) {
  BitVec out(f.rows());
  for (std::size_t i = 0; i < f.rows(); ++i) {
    bool acc = false;
    for (std::size_t j = 0; j < f.cols(); ++j)
      if (f(i, j).v && v.get(j)) acc = !acc;
    if (acc) out.set(i, true);
  }
  return out;
}

// Matrix of the map induced by f on homology, in representative bases.
inline F2Matrix induced_map(const F2Homology& src, const F2Homology& tgt, const F2Matrix& f) {
  F2Matrix m(tgt.dim(), src.dim());
  for (std::size_t k = 0; k < src.dim(); ++k) {
    BitVec c = tgt.coordinates(apply_f2(f, src.representatives()[k]));
    for (std::size_t i = 0; i < tgt.dim(); ++i)
      if (c.get(i)) m(i, k) = Gf2(true);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Explicit homology over F2[t]: classes are written as vectors of
// polynomials, reduced modulo the torsion invariant factors.

class PolyHomology {
 public:
  explicit PolyHomology(const RingMatrix<F2Poly>& d) : n_(d.cols()) {
    z_ = kernel_basis(d);
    RingMatrix<F2Poly> im = z_.coords * d;
    auto s = smith_normal_form(im, kTrackU);
    u_ = s.U;
    factors_ = s.factors;
    k_ = z_.basis.cols();
  }

  // Number of summands: rank(factors) cyclic parts followed by free parts.
  std::size_t summands() const { return k_; }
  const std::vector<F2Poly>& factors() const { return factors_; }
  std::size_t free_rank() const { return k_ - factors_.size(); }

  std::vector<F2Poly> coordinates(const std::vector<F2Poly>& cycle) const {
    if (cycle.size() != n_) throw ComplexError("PolyHomology::coordinates: wrong length");
    std::vector<F2Poly> w = u_.apply(z_.coords.apply(cycle));
    for (std::size_t i = 0; i < factors_.size(); ++i) w[i] = divmod(w[i], factors_[i]).second;
    return w;
  }

  // F2 coordinates: deg(f_i) bits per torsion summand, free_degree bits per
  // free summand (coefficients of t^0 .. t^(free_degree - 1)).
  BitVec flatten(const std::vector<F2Poly>& w, int free_degree) const {
    std::size_t len = 0;
    for (const auto& f : factors_) len += static_cast<std::size_t>(f.degree());
    len += free_rank() * static_cast<std::size_t>(free_degree);
    BitVec out(len);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < k_; ++i) {
      int width = i < factors_.size() ? factors_[i].degree() : free_degree;
      for (int e = 0; e < width; ++e)
        if (w[i].coeff(e)) out.set(pos + static_cast<std::size_t>(e), true);
      pos += static_cast<std::size_t>(width);
    }
    return out;
  }

 private:
  std::size_t n_;
  std::size_t k_ = 0;
  KernelBasis<F2Poly> z_;
  RingMatrix<F2Poly> u_;
  std::vector<F2Poly> factors_;
};

}  // namespace polarfloer
