// Free F2[Z/2]-complexes, the functor A_F2 with its endomorphism T, the Borel
// complex, the comparison map F with homotopy H and the A-infinity term F^2,
// finite-type blocks, and the tensor comparison.
//
// Borel complexes use the F2[t]-basis x_0, iota x_0, x_1, iota x_1, ... (index
// 2i and 2i+1). Tensor products of Z/2-complexes use the F2[Z/2]-basis
// e_ij = x_i (x) x'_j at index 2(i n' + j) and f_ij = x_i (x) iota x'_j at
// index 2(i n' + j) + 1.
#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polarfloer/complexes.hpp"
#include "polarfloer/matrix.hpp"
#include "polarfloer/patterns.hpp"
#include "polarfloer/rings.hpp"
#include "polarfloer/snf.hpp"

namespace polarfloer {

using Z2FreeComplex = FreeComplex<GroupRingElem>;
using Z2Matrix = RingMatrix<GroupRingElem>;
using PolyMatrix = RingMatrix<F2Poly>;

// An F2 complex with a chain endomorphism T (the action of t).
struct TComplex {
  F2Complex c;
  F2Matrix T;

  TComplex() = default;
  TComplex(F2Complex complex, F2Matrix t) : c(std::move(complex)), T(std::move(t)) {
    if (T.rows() != c.size() || T.cols() != c.size())
      throw ComplexError("T has shape " + T.shape() + " on " + std::to_string(c.size()) +
                         " generators");
    if (!(T * c.d() == c.d() * T)) throw ComplexError("T is not a chain map");
  }
};

inline PolyMatrix lift_to_poly(const F2Matrix& m) {
  return m.map<F2Poly>([](Gf2 x) { return x.v ? F2Poly::one() : F2Poly(); });
}

inline F2Matrix augment(const Z2Matrix& m) {
  return m.map<Gf2>([](GroupRingElem x) { return x.augment(); });
}

inline F2Matrix iota_part(const Z2Matrix& m) {
  return m.map<Gf2>([](GroupRingElem x) { return Gf2(x.b); });
}

inline TComplex a_f2(const Z2FreeComplex& a) {
  std::optional<std::vector<int>> g;
  if (a.graded()) g = a.grading();
  return TComplex(F2Complex(a.labels(), augment(a.d()), g), iota_part(a.d()));
}

// Homology of a TComplex as an F2[t]-module: the cokernel of tI - T_H.
inline ModuleReport<F2Poly> tmodule_report(const TComplex& tc) {
  F2Homology h(tc.c.d());
  F2Matrix th = induced_map(h, h, tc.T);
  std::size_t n = h.dim();
  PolyMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      F2Poly x = th(i, j).v ? F2Poly::one() : F2Poly();
      if (i == j) x += F2Poly::monomial(1);
      m(i, j) = x;
    }
  return report_from_factors<F2Poly>(0, invariant_factors(m));
}

// Constant part of the Borel differential on the basis {x_i, iota x_i}.
inline PolyMatrix z2_to_pairs(const Z2Matrix& d) {
  std::size_t n = d.cols();
  PolyMatrix m(2 * d.rows(), 2 * n);
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j) {
      GroupRingElem c = d(i, j);
      if (c.is_zero()) continue;
      // d(x_j) has c x_i = a x_i + b iota x_i; d(iota x_j) = b x_i + a iota x_i.
      if (c.a) {
        m(2 * i, 2 * j) = F2Poly::one();
        m(2 * i + 1, 2 * j + 1) = F2Poly::one();
      }
      if (c.b) {
        m(2 * i + 1, 2 * j) = F2Poly::one();
        m(2 * i, 2 * j + 1) = F2Poly::one();
      }
    }
  return m;
}

// The involution on the basis {x_i, iota x_i}.
inline PolyMatrix iota_on_pairs(std::size_t n) {
  PolyMatrix m(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    m(2 * i + 1, 2 * i) = F2Poly::one();
    m(2 * i, 2 * i + 1) = F2Poly::one();
  }
  return m;
}

inline std::vector<std::string> pair_labels(const std::vector<std::string>& labels) {
  std::vector<std::string> out;
  for (const auto& l : labels) {
    out.push_back(l);
    out.push_back("i." + l);
  }
  return out;
}

// d_borel = d_A + t (1 + iota) on A (x) F2[t].
inline PolyComplex borel(const Z2FreeComplex& a) {
  std::size_t n = a.size();
  PolyMatrix d = z2_to_pairs(a.d());
  F2Poly t = F2Poly::monomial(1);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t s = 0; s < 2; ++s) {
      d(2 * j, 2 * j + s) += t;
      d(2 * j + 1, 2 * j + s) += t;
    }
  std::optional<std::vector<int>> g;
  if (a.graded()) {
    std::vector<int> gg;
    for (int x : a.grading()) {
      gg.push_back(x);
      gg.push_back(x);
    }
    g = gg;
  }
  return PolyComplex(pair_labels(a.labels()), std::move(d), std::move(g));
}

// The Borel complex reduced modulo t^n, as an F2 complex on t^k x, t^k iota x
// (k < n); generator (k, b) has index k * 2|A| + b.
inline F2Complex borel_mod_t(const Z2FreeComplex& a, int n) {
  if (n < 1) throw std::invalid_argument("borel_mod_t: truncation must be at least 1");
  PolyComplex b = borel(a);
  std::size_t m = b.size(), N = static_cast<std::size_t>(n);
  F2Matrix d(m * N, m * N);
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        for (int e : b.d()(i, j).exponents()) {
          std::size_t kk = k + static_cast<std::size_t>(e);
          if (kk < N) d(kk * m + i, k * m + j) += Gf2(true);
        }
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < N; ++k)
    for (const auto& l : b.labels()) labels.push_back("t^" + std::to_string(k) + "." + l);
  return F2Complex(std::move(labels), std::move(d));
}

// F(x_i) = x_i + iota x_i and H(x_i) = x_i, as F2[t]-matrices from the
// generators of A_F2 to those of the Borel complex; T and d_F2 are read as
// constant matrices.
struct ComparisonF {
  TComplex source;
  PolyComplex target;
  PolyMatrix F;
  PolyMatrix H;

  bool chain_map() const { return target.d() * F == F * lift_to_poly(source.c.d()); }
  // tF + FT = d_borel H + H d_F2.
  bool homotopy_identity() const {
    F2Poly t = F2Poly::monomial(1);
    PolyMatrix lhs = t * F + F * lift_to_poly(source.T);
    PolyMatrix rhs = target.d() * H + H * lift_to_poly(source.c.d());
    return lhs == rhs;
  }
};

inline ComparisonF comparison_F(const Z2FreeComplex& a) {
  ComparisonF out;
  out.source = a_f2(a);
  out.target = borel(a);
  std::size_t n = a.size();
  out.F = PolyMatrix(2 * n, n);
  out.H = PolyMatrix(2 * n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.F(2 * i, i) = F2Poly::one();
    out.F(2 * i + 1, i) = F2Poly::one();
    out.H(2 * i, i) = F2Poly::one();
  }
  return out;
}

struct QuasiIsoReport {
  ModuleReport<F2Poly> source;
  ModuleReport<F2Poly> target;
  bool chain_map = false;
  bool injective = false;
  bool holds() const { return chain_map && injective && source == target; }
};

// F is certified a quasi-isomorphism by equal F2[t]-module reports and an
// F2-injective induced map on homology.
inline QuasiIsoReport check_comparison(const ComparisonF& cf) {
  QuasiIsoReport rep;
  rep.chain_map = cf.chain_map();
  rep.source = tmodule_report(cf.source);
  rep.target = homology(cf.target);
  F2Homology hs(cf.source.c.d());
  PolyHomology ht(cf.target.d());
  std::vector<std::vector<F2Poly>> coords;
  int width = 1;
  for (const auto& z : hs.representatives()) {
    std::vector<F2Poly> v(cf.source.c.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      if (z.get(i)) v[i] = F2Poly::one();
    auto w = ht.coordinates(cf.F.apply(v));
    for (const auto& x : w) width = std::max(width, x.degree() + 1);
    coords.push_back(std::move(w));
  }
  std::vector<BitVec> cols;
  for (const auto& w : coords) cols.push_back(ht.flatten(w, width));
  std::size_t len = cols.empty() ? 0 : cols[0].size();
  rep.injective = f2_rank(matrix_from_columns(cols, len)) == hs.dim();
  return rep;
}

// F^2(t^n, b) = sum_{k=0}^{n-1} T_target^(n-1-k) H T_source^k b.
template <class R>
std::vector<R> ainfty_f2(int n, const std::vector<R>& b, const RingMatrix<R>& t_target,
                         const RingMatrix<R>& t_source, const RingMatrix<R>& h) {
  if (n < 0) throw std::invalid_argument("ainfty_f2: negative power");
  std::vector<R> acc(h.rows(), RingTraits<R>::zero());
  std::vector<R> cur = b;  // T_source^k b
  for (int k = 0; k < n; ++k) {
    std::vector<R> term = h.apply(cur);
    for (int j = 0; j < n - 1 - k; ++j) term = t_target.apply(term);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = acc[i] + term[i];
    cur = t_source.apply(cur);
  }
  return acc;
}

// Replaces x_i by iota x_i for flip[i] set: entries between differently
// flipped generators swap a and b.
inline Z2FreeComplex relabel(const Z2FreeComplex& a, const std::vector<bool>& flip) {
  if (flip.size() != a.size()) throw std::invalid_argument("relabel: flip set has wrong length");
  Z2Matrix d = a.d();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (flip[i] != flip[j]) d(i, j) = d(i, j).conj_iota();
  std::vector<std::string> labels = a.labels();
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (flip[i]) labels[i] = "i." + labels[i];
  std::optional<std::vector<int>> g;
  if (a.graded()) g = a.grading();
  return Z2FreeComplex(std::move(labels), std::move(d), std::move(g));
}

// Homotopy between T and T' after relabeling: H(x_i) = x_i on flipped i.
inline F2Matrix relabel_homotopy(const std::vector<bool>& flip) {
  F2Matrix h(flip.size(), flip.size());
  for (std::size_t i = 0; i < flip.size(); ++i)
    if (flip[i]) h(i, i) = Gf2(true);
  return h;
}

// ---------------------------------------------------------------------------
// Finite-type blocks: d x_i = (1 + iota) x_{i+1}, deg x_i = i.

enum class BlockKind { B0, Bplus, Bminus, Binfty };

inline BlockKind parse_block_kind(const std::string& s) {
  if (s == "B0") return BlockKind::B0;
  if (s == "Bplus") return BlockKind::Bplus;
  if (s == "Bminus") return BlockKind::Bminus;
  if (s == "Binfty") return BlockKind::Binfty;
  throw std::invalid_argument("unknown block kind '" + s + "' (expected B0, Bplus, Bminus, Binfty)");
}

inline std::string block_name(BlockKind k) {
  switch (k) {
    case BlockKind::B0: return "B0";
    case BlockKind::Bplus: return "Bplus";
    case BlockKind::Bminus: return "Bminus";
    case BlockKind::Binfty: return "Binfty";
  }
  return "";
}

// Indices of the block inside [lo, hi].
inline std::pair<int, int> block_support(BlockKind k, int lo, int hi) {
  switch (k) {
    case BlockKind::B0: return {std::max(lo, 0), std::min(hi, 0)};
    case BlockKind::Bplus: return {std::max(lo, 0), hi};
    case BlockKind::Bminus: return {lo, std::min(hi, -1)};
    case BlockKind::Binfty: return {lo, hi};
  }
  return {0, -1};
}

inline Z2FreeComplex block_window(BlockKind k, int lo, int hi) {
  auto [a, b] = block_support(k, lo, hi);
  std::vector<std::string> labels;
  std::vector<int> g;
  for (int i = a; i <= b; ++i) {
    labels.push_back("x" + std::to_string(i));
    g.push_back(i);
  }
  std::size_t n = labels.size();
  Z2Matrix d(n, n);
  for (std::size_t j = 0; j + 1 < n; ++j) d(j + 1, j) = GroupRingElem::norm();
  return Z2FreeComplex(std::move(labels), std::move(d), std::move(g));
}

// The window [lo, hi] used for a block of the given size.
inline std::pair<int, int> block_range(BlockKind k, int size) {
  switch (k) {
    case BlockKind::B0: return {0, 0};
    case BlockKind::Bplus: return {0, size - 1};
    case BlockKind::Bminus: return {-size, -1};
    case BlockKind::Binfty: return {-size, size};
  }
  return {0, 0};
}

inline Z2FreeComplex finite_type_blocks(BlockKind k, int size) {
  if (k != BlockKind::B0 && size < 1)
    throw std::invalid_argument("finite_type_blocks: size must be at least 1");
  auto [lo, hi] = block_range(k, size);
  return block_window(k, lo, hi);
}

// ---------------------------------------------------------------------------
// Tensor products.

inline Z2FreeComplex tensor_z2(const Z2FreeComplex& a, const Z2FreeComplex& b) {
  std::size_t n = a.size(), m = b.size();
  auto e = [&](std::size_t i, std::size_t j) { return 2 * (i * m + j); };
  auto f = [&](std::size_t i, std::size_t j) { return 2 * (i * m + j) + 1; };
  Z2Matrix d(2 * n * m, 2 * n * m);
  const GroupRingElem one = GroupRingElem::one(), io = GroupRingElem::iota();
  auto add = [&](std::size_t row, std::size_t col, GroupRingElem c) { d(row, col) += c; };
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < m; ++l) {
      for (std::size_t i = 0; i < n; ++i) {
        GroupRingElem c = a.d()(i, k);
        if (c.is_zero()) continue;
        // d x_k (x) x'_l = a e_il + b iota f_il; d x_k (x) iota x'_l = a f_il + b iota e_il.
        if (c.a) add(e(i, l), e(k, l), one);
        if (c.b) add(f(i, l), e(k, l), io);
        if (c.a) add(f(i, l), f(k, l), one);
        if (c.b) add(e(i, l), f(k, l), io);
      }
      for (std::size_t j = 0; j < m; ++j) {
        GroupRingElem c = b.d()(j, l);
        if (c.is_zero()) continue;
        // x_k (x) d x'_l = a e_kj + b f_kj; x_k (x) iota d x'_l = a f_kj + b e_kj.
        if (c.a) add(e(k, j), e(k, l), one);
        if (c.b) add(f(k, j), e(k, l), one);
        if (c.a) add(f(k, j), f(k, l), one);
        if (c.b) add(e(k, j), f(k, l), one);
      }
    }
  std::vector<std::string> labels(2 * n * m);
  std::optional<std::vector<int>> g;
  if (a.graded() && b.graded()) g = std::vector<int>(2 * n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      labels[e(i, j)] = a.labels()[i] + "*" + b.labels()[j];
      labels[f(i, j)] = a.labels()[i] + "*i." + b.labels()[j];
      if (g) (*g)[e(i, j)] = (*g)[f(i, j)] = a.grading()[i] + b.grading()[j];
    }
  return Z2FreeComplex(std::move(labels), std::move(d), std::move(g));
}

// B (x)^L B' for free F2[t]-complexes: free, so the ordinary tensor over F2[t].
inline PolyComplex derived_tensor(const PolyComplex& b, const PolyComplex& c) {
  return tensor(b, c);
}

struct MonoidalReport {
  ModuleReport<F2Poly> borel_side;   // (A (x) A')[t] with d_borel
  ModuleReport<F2Poly> tensor_side;  // A[t] (x)^L A'[t]
  bool d_tensor_matches = false;     // explicit d_tensor equals the derived tensor
  bool reports_equal() const { return borel_side == tensor_side; }
  bool holds() const { return d_tensor_matches && reports_equal(); }
};

// d_tensor = d_A (x) 1 + 1 (x) d_A' + t (1 (x) iota + iota (x) 1) on A[t] (x) A'[t].
inline PolyMatrix d_tensor_model(const Z2FreeComplex& a, const Z2FreeComplex& b) {
  PolyMatrix da = z2_to_pairs(a.d()), db = z2_to_pairs(b.d());
  PolyMatrix ia = iota_on_pairs(a.size()), ib = iota_on_pairs(b.size());
  PolyMatrix one_a = PolyMatrix::identity(da.rows()), one_b = PolyMatrix::identity(db.rows());
  F2Poly t = F2Poly::monomial(1);
  return kron(da, one_b) + kron(one_a, db) + t * (kron(one_a, ib) + kron(ia, one_b));
}

inline MonoidalReport verify_monoidal(const Z2FreeComplex& a, const Z2FreeComplex& b) {
  MonoidalReport rep;
  PolyComplex lhs = borel(tensor_z2(a, b));
  PolyComplex rhs = derived_tensor(borel(a), borel(b));
  rep.d_tensor_matches = d_tensor_model(a, b) == rhs.d();
  rep.borel_side = homology(lhs);
  rep.tensor_side = homology(rhs);
  return rep;
}

// Window patterns of the two sides of the block table.
inline PatternReport a_f2_block_pattern(BlockKind k, int size) {
  auto [lo, hi] = block_range(k, size);
  return classify_pattern(
      [&](int l, int h) { return tmodule_report(a_f2(block_window(k, l, h))); }, lo, hi);
}

inline PatternReport borel_block_pattern(BlockKind k, int size) {
  auto [lo, hi] = block_range(k, size);
  return classify_pattern([&](int l, int h) { return homology(borel(block_window(k, l, h))); },
                          lo, hi);
}

}  // namespace polarfloer
