// Morse theory on a manifold with boundary: the complexes Č, Ĉ, C̄ assembled
// from the eight count matrices, the relations they must satisfy, and the
// exact triangle j*, i*, ∂.
//
// Matrix convention: d_ab maps C_b to C_a, so it has |C_a| rows and |C_b|
// columns. Counts are F2[Z/2]-valued; unlifted datasets only use 0 and 1.
// Gradings are "native": every count raises degree by 1 except d∂_su (0) and
// d∂_us (+2). In C̄ the boundary-unstable generators sit one degree lower.
#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polarfloer/complexes.hpp"
#include "polarfloer/equivariant.hpp"
#include "polarfloer/matrix.hpp"
#include "polarfloer/patterns.hpp"
#include "polarfloer/rings.hpp"

namespace polarfloer {

struct KMGenerator {
  std::string label;
  std::optional<int> grading;
  std::optional<std::string> point;  // underlying critical point, for ladders
  std::optional<int> level;          // ladder position; used for windows

  friend bool operator==(const KMGenerator&, const KMGenerator&) = default;
};

enum class KMPart { o, s, u };

struct KMDataset {
  std::vector<KMGenerator> o, s, u;
  bool lifted = false;
  Z2Matrix d_oo, d_os, d_uo, d_us;
  Z2Matrix db_ss, db_su, db_us, db_uu;

  // Empty matrices of the right shapes for the current generator lists.
  void reset_matrices() {
    std::size_t no = o.size(), ns = s.size(), nu = u.size();
    d_oo = Z2Matrix(no, no);
    d_os = Z2Matrix(no, ns);
    d_uo = Z2Matrix(nu, no);
    d_us = Z2Matrix(nu, ns);
    db_ss = Z2Matrix(ns, ns);
    db_su = Z2Matrix(ns, nu);
    db_us = Z2Matrix(nu, ns);
    db_uu = Z2Matrix(nu, nu);
  }
  std::size_t generator_count() const { return o.size() + s.size() + u.size(); }
  bool graded() const {
    for (const auto* part : {&o, &s, &u})
      for (const auto& g : *part)
        if (!g.grading) return false;
    return true;
  }
};

class KMError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RelationCheck {
  std::string name;
  bool ok = true;
  std::string witness;  // the nonzero matrix when failing
};

struct RelationReport {
  std::vector<RelationCheck> checks;
  bool ok() const {
    for (const auto& c : checks)
      if (!c.ok) return false;
    return true;
  }
  std::string failures() const {
    std::ostringstream os;
    for (const auto& c : checks)
      if (!c.ok) os << c.name << " fails; nonzero matrix:\n" << c.witness;
    return os.str();
  }
};

namespace detail {

inline void check_shape(const Z2Matrix& m, std::size_t r, std::size_t c, const char* name) {
  if (m.rows() != r || m.cols() != c)
    throw KMError(std::string("count matrix ") + name + " is " + m.shape() + ", expected " +
                  std::to_string(r) + "x" + std::to_string(c));
}

inline std::vector<std::string> part_labels(const std::vector<KMGenerator>& g) {
  std::vector<std::string> out;
  for (const auto& x : g) out.push_back(x.label);
  return out;
}

}  // namespace detail

inline void check_km_shapes(const KMDataset& k) {
  std::size_t no = k.o.size(), ns = k.s.size(), nu = k.u.size();
  detail::check_shape(k.d_oo, no, no, "d_oo");
  detail::check_shape(k.d_os, no, ns, "d_os");
  detail::check_shape(k.d_uo, nu, no, "d_uo");
  detail::check_shape(k.d_us, nu, ns, "d_us");
  detail::check_shape(k.db_ss, ns, ns, "db_ss");
  detail::check_shape(k.db_su, ns, nu, "db_su");
  detail::check_shape(k.db_us, nu, ns, "db_us");
  detail::check_shape(k.db_uu, nu, nu, "db_uu");
  std::set<std::string> seen;
  for (const auto* part : {&k.o, &k.s, &k.u})
    for (const auto& g : *part)
      if (!seen.insert(g.label).second) throw KMError("duplicate generator label '" + g.label + "'");
  if (!k.lifted) {
    for (const auto* m : {&k.d_oo, &k.d_os, &k.d_uo, &k.d_us, &k.db_ss, &k.db_su, &k.db_us,
                          &k.db_uu})
      for (std::size_t i = 0; i < m->rows(); ++i)
        for (std::size_t j = 0; j < m->cols(); ++j)
          if ((*m)(i, j).b) throw KMError("unlifted dataset has an iota coefficient");
  }
}

inline RelationReport validate_relations(const KMDataset& k) {
  check_km_shapes(k);
  auto check = [](std::string name, const Z2Matrix& m) {
    RelationCheck c{std::move(name), m.is_zero(), ""};
    if (!c.ok) c.witness = m.str();
    return c;
  };
  RelationReport rep;
  rep.checks.push_back(check("d_oo^2 + d_os db_su d_uo", k.d_oo * k.d_oo + k.d_os * k.db_su * k.d_uo));
  rep.checks.push_back(check("d_oo d_os + d_os db_ss + d_os db_su d_us",
                             k.d_oo * k.d_os + k.d_os * k.db_ss + k.d_os * k.db_su * k.d_us));
  rep.checks.push_back(check("d_uo d_oo + db_uu d_uo + d_us db_su d_uo",
                             k.d_uo * k.d_oo + k.db_uu * k.d_uo + k.d_us * k.db_su * k.d_uo));
  rep.checks.push_back(check(
      "db_us + d_uo d_os + db_uu d_us + d_us db_ss + d_us db_su d_us",
      k.db_us + k.d_uo * k.d_os + k.db_uu * k.d_us + k.d_us * k.db_ss + k.d_us * k.db_su * k.d_us));
  Z2Matrix bar = block2(k.db_ss, k.db_su, k.db_us, k.db_uu);
  rep.checks.push_back(check("dbar^2", bar * bar));
  return rep;
}

struct KMTriple {
  Z2FreeComplex check, hat, bar;  // Č on o+s, Ĉ on o+u, C̄ on s+u
  Z2Matrix j_star;                // Ĉ -> Č
  Z2Matrix i_star;                // Č -> C̄
  Z2Matrix connecting;            // C̄ -> Ĉ
  bool lifted = false;
};

namespace detail {

inline std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline std::optional<std::vector<int>> part_grading(const std::vector<KMGenerator>& a, int shift_a,
                                                    const std::vector<KMGenerator>& b, int shift_b) {
  std::vector<int> g;
  for (const auto& x : a) {
    if (!x.grading) return std::nullopt;
    g.push_back(*x.grading + shift_a);
  }
  for (const auto& x : b) {
    if (!x.grading) return std::nullopt;
    g.push_back(*x.grading + shift_b);
  }
  return g;
}

}  // namespace detail

inline KMTriple assemble(const KMDataset& k) {
  RelationReport rel = validate_relations(k);
  if (!rel.ok()) throw KMError("relations fail:\n" + rel.failures());
  std::size_t no = k.o.size(), ns = k.s.size(), nu = k.u.size();
  auto lo = detail::part_labels(k.o), ls = detail::part_labels(k.s), lu = detail::part_labels(k.u);
  KMTriple t;
  t.lifted = k.lifted;
  bool graded = k.graded();
  auto grading = [&](const std::vector<KMGenerator>& a, int sa, const std::vector<KMGenerator>& b,
                     int sb) {
    return graded ? detail::part_grading(a, sa, b, sb) : std::nullopt;
  };
  try {
    t.check = Z2FreeComplex(detail::concat(lo, ls),
                            block2(k.d_oo, k.d_os, k.db_su * k.d_uo, k.db_ss + k.db_su * k.d_us),
                            grading(k.o, 0, k.s, 0));
    t.hat = Z2FreeComplex(detail::concat(lo, lu),
                          block2(k.d_oo, k.d_os * k.db_su, k.d_uo, k.db_uu + k.d_us * k.db_su),
                          grading(k.o, 0, k.u, 0));
    t.bar = Z2FreeComplex(detail::concat(ls, lu), block2(k.db_ss, k.db_su, k.db_us, k.db_uu),
                          grading(k.s, 0, k.u, -1));
  } catch (const ComplexError& e) {
    throw KMError(std::string("assembled complex is invalid: ") + e.what());
  }
  t.j_star = direct_sum(Z2Matrix::identity(no), k.db_su);
  t.i_star = block2(Z2Matrix(ns, no), Z2Matrix::identity(ns), k.d_uo, k.d_us);
  t.connecting = block2(k.d_os, Z2Matrix(no, nu), k.d_us, Z2Matrix::identity(nu));
  return t;
}

struct TriangleReport {
  bool chain_maps = false;
  std::size_t dim_hat = 0, dim_check = 0, dim_bar = 0;
  std::size_t rank_j = 0, rank_i = 0, rank_connecting = 0;
  bool composites_zero = false;
  bool exact_at_check = false, exact_at_bar = false, exact_at_hat = false;
  bool exact() const {
    return chain_maps && composites_zero && exact_at_check && exact_at_bar && exact_at_hat;
  }
};

// Exactness of Ĥ -> Ȟ -> H̄ -> Ĥ over F2: each composite vanishes on homology
// and the ranks of consecutive maps add up to the dimension in between.
inline TriangleReport verify_triangle(const KMTriple& kt) {
  TriangleReport r;
  F2Matrix dc = augment(kt.check.d()), dh = augment(kt.hat.d()), db = augment(kt.bar.d());
  F2Matrix j = augment(kt.j_star), i = augment(kt.i_star), c = augment(kt.connecting);
  r.chain_maps = j * dh == dc * j && i * dc == db * i && c * db == dh * c &&
                 kt.j_star * kt.hat.d() == kt.check.d() * kt.j_star &&
                 kt.i_star * kt.check.d() == kt.bar.d() * kt.i_star &&
                 kt.connecting * kt.bar.d() == kt.hat.d() * kt.connecting;
  if (!r.chain_maps) return r;
  F2Homology hc(dc), hh(dh), hb(db);
  F2Matrix js = induced_map(hh, hc, j), is = induced_map(hc, hb, i), cs = induced_map(hb, hh, c);
  r.dim_hat = hh.dim();
  r.dim_check = hc.dim();
  r.dim_bar = hb.dim();
  r.rank_j = f2_rank(js);
  r.rank_i = f2_rank(is);
  r.rank_connecting = f2_rank(cs);
  r.composites_zero = (is * js).is_zero() && (cs * is).is_zero() && (js * cs).is_zero();
  r.exact_at_check = r.rank_j + r.rank_i == r.dim_check;
  r.exact_at_bar = r.rank_i + r.rank_connecting == r.dim_bar;
  r.exact_at_hat = r.rank_connecting + r.rank_j == r.dim_hat;
  return r;
}

// Homology reports: F2 dimensions, and for lifted data the F2[t]-module
// structure through T.
struct KMHomology {
  std::size_t dim_check = 0, dim_hat = 0, dim_bar = 0;
  std::optional<ModuleReport<F2Poly>> check, hat, bar;
};

inline KMHomology km_homology(const KMTriple& kt) {
  KMHomology h;
  h.dim_check = homology(F2Complex(kt.check.labels(), augment(kt.check.d()))).free_rank;
  h.dim_hat = homology(F2Complex(kt.hat.labels(), augment(kt.hat.d()))).free_rank;
  h.dim_bar = homology(F2Complex(kt.bar.labels(), augment(kt.bar.d()))).free_rank;
  if (kt.lifted) {
    h.check = tmodule_report(a_f2(kt.check));
    h.hat = tmodule_report(a_f2(kt.hat));
    h.bar = tmodule_report(a_f2(kt.bar));
  }
  return h;
}

// ---------------------------------------------------------------------------
// Windows and closure operations.

namespace detail {

inline std::vector<std::size_t> window_indices(const std::vector<KMGenerator>& g, int lo, int hi) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!g[i].level || (*g[i].level >= lo && *g[i].level <= hi)) idx.push_back(i);
  return idx;
}

template <class T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace detail

// Keeps generators without a level and those with level in [lo, hi].
inline KMDataset restrict_window(const KMDataset& k, int lo, int hi) {
  auto io = detail::window_indices(k.o, lo, hi);
  auto is = detail::window_indices(k.s, lo, hi);
  auto iu = detail::window_indices(k.u, lo, hi);
  KMDataset w;
  w.lifted = k.lifted;
  w.o = detail::pick(k.o, io);
  w.s = detail::pick(k.s, is);
  w.u = detail::pick(k.u, iu);
  w.d_oo = k.d_oo.submatrix(io, io);
  w.d_os = k.d_os.submatrix(io, is);
  w.d_uo = k.d_uo.submatrix(iu, io);
  w.d_us = k.d_us.submatrix(iu, is);
  w.db_ss = k.db_ss.submatrix(is, is);
  w.db_su = k.db_su.submatrix(is, iu);
  w.db_us = k.db_us.submatrix(iu, is);
  w.db_uu = k.db_uu.submatrix(iu, iu);
  return w;
}

inline std::pair<int, int> level_range(const KMDataset& k) {
  bool any = false;
  int lo = 0, hi = 0;
  for (const auto* part : {&k.o, &k.s, &k.u})
    for (const auto& g : *part)
      if (g.level) {
        lo = any ? std::min(lo, *g.level) : *g.level;
        hi = any ? std::max(hi, *g.level) : *g.level;
        any = true;
      }
  return {lo, hi};
}

inline KMDataset km_direct_sum(const KMDataset& a, const KMDataset& b, const std::string& pa = "a.",
                               const std::string& pb = "b.") {
  KMDataset out;
  out.lifted = a.lifted || b.lifted;
  auto join = [&](const std::vector<KMGenerator>& x, const std::vector<KMGenerator>& y) {
    std::vector<KMGenerator> r;
    for (auto g : x) {
      g.label = pa + g.label;
      if (g.point) g.point = pa + *g.point;
      r.push_back(g);
    }
    for (auto g : y) {
      g.label = pb + g.label;
      if (g.point) g.point = pb + *g.point;
      r.push_back(g);
    }
    return r;
  };
  out.o = join(a.o, b.o);
  out.s = join(a.s, b.s);
  out.u = join(a.u, b.u);
  out.d_oo = direct_sum(a.d_oo, b.d_oo);
  out.d_os = direct_sum(a.d_os, b.d_os);
  out.d_uo = direct_sum(a.d_uo, b.d_uo);
  out.d_us = direct_sum(a.d_us, b.d_us);
  out.db_ss = direct_sum(a.db_ss, b.db_ss);
  out.db_su = direct_sum(a.db_su, b.db_su);
  out.db_us = direct_sum(a.db_us, b.db_us);
  out.db_uu = direct_sum(a.db_uu, b.db_uu);
  return out;
}

// Change of basis inside each of C_o, C_s, C_u: d_ab -> P_a d_ab P_b^-1.
inline KMDataset km_conjugate(const KMDataset& k, const Z2Matrix& po, const Z2Matrix& po_inv,
                              const Z2Matrix& ps, const Z2Matrix& ps_inv, const Z2Matrix& pu,
                              const Z2Matrix& pu_inv) {
  KMDataset out = k;
  out.d_oo = po * k.d_oo * po_inv;
  out.d_os = po * k.d_os * ps_inv;
  out.d_uo = pu * k.d_uo * po_inv;
  out.d_us = pu * k.d_us * ps_inv;
  out.db_ss = ps * k.db_ss * ps_inv;
  out.db_su = ps * k.db_su * pu_inv;
  out.db_us = pu * k.db_us * ps_inv;
  out.db_uu = pu * k.db_uu * pu_inv;
  return out;
}

// Tensor with an F2 complex V: diagonal blocks gain 1 (x) d_V, the others
// become (x) 1.
inline KMDataset km_tensor(const KMDataset& k, const F2Complex& v) {
  std::size_t m = v.size();
  Z2Matrix dv = v.d().map<GroupRingElem>([](Gf2 x) { return GroupRingElem(x.v, false); });
  Z2Matrix one = Z2Matrix::identity(m);
  auto off = [&](const Z2Matrix& a) { return kron(a, one); };
  auto diag = [&](const Z2Matrix& a) {
    return kron(a, one) + kron(Z2Matrix::identity(a.rows()), dv);
  };
  auto gens = [&](const std::vector<KMGenerator>& g) {
    std::vector<KMGenerator> r;
    for (const auto& x : g)
      for (std::size_t j = 0; j < m; ++j) {
        KMGenerator y = x;
        y.label = x.label + "*" + v.labels()[j];
        if (x.grading && v.graded())
          y.grading = *x.grading + v.grading()[j];
        else
          y.grading.reset();
        r.push_back(y);
      }
    return r;
  };
  KMDataset out;
  out.lifted = k.lifted;
  out.o = gens(k.o);
  out.s = gens(k.s);
  out.u = gens(k.u);
  out.d_oo = diag(k.d_oo);
  out.d_os = off(k.d_os);
  out.d_uo = off(k.d_uo);
  out.d_us = off(k.d_us);
  out.db_ss = diag(k.db_ss);
  out.db_su = off(k.db_su);
  out.db_us = off(k.db_us);
  out.db_uu = diag(k.db_uu);
  return out;
}

// Transpose with the roles of C_s and C_u exchanged and gradings negated.
inline KMDataset km_dual(const KMDataset& k) {
  auto neg = [](std::vector<KMGenerator> g) {
    for (auto& x : g) {
      x.label = "dual." + x.label;
      if (x.grading) x.grading = -*x.grading;
      if (x.level) x.level = -*x.level;
      if (x.point) x.point = "dual." + *x.point;
    }
    return g;
  };
  KMDataset out;
  out.lifted = k.lifted;
  out.o = neg(k.o);
  out.s = neg(k.u);
  out.u = neg(k.s);
  out.d_oo = k.d_oo.transpose();
  out.d_os = k.d_uo.transpose();
  out.d_uo = k.d_os.transpose();
  out.d_us = k.d_us.transpose();
  out.db_ss = k.db_uu.transpose();
  out.db_uu = k.db_ss.transpose();
  out.db_su = k.db_su.transpose();
  out.db_us = k.db_us.transpose();
  return out;
}

// Window patterns of Ȟ, Ĥ, H̄ for lifted data. The first form regenerates the
// dataset on any window; the second only has the levels present in k.
struct KMPatterns {
  PatternReport check, hat, bar;
};

using KMWindowSource = std::function<KMDataset(int lo, int hi)>;

namespace detail {

inline WindowReporter km_reporter(const KMWindowSource& src, int which) {
  return [src, which](int lo, int hi) {
    KMTriple t = assemble(src(lo, hi));
    const Z2FreeComplex& c = which == 0 ? t.check : which == 1 ? t.hat : t.bar;
    return tmodule_report(a_f2(c));
  };
}

}  // namespace detail

inline KMPatterns km_patterns(const KMWindowSource& src, int lo, int hi) {
  return {classify_pattern(detail::km_reporter(src, 0), lo, hi),
          classify_pattern(detail::km_reporter(src, 1), lo, hi),
          classify_pattern(detail::km_reporter(src, 2), lo, hi)};
}

inline KMPatterns km_patterns(const KMDataset& k) {
  if (!k.lifted) throw KMError("window patterns need a Z/2-lifted dataset");
  auto [lo, hi] = level_range(k);
  KMWindowSource src = [&k](int l, int h) { return restrict_window(k, l, h); };
  return {classify_pattern_inside(detail::km_reporter(src, 0), lo, hi),
          classify_pattern_inside(detail::km_reporter(src, 1), lo, hi),
          classify_pattern_inside(detail::km_reporter(src, 2), lo, hi)};
}

// ---------------------------------------------------------------------------
// The canonical model: interior y_1..y_n with d y_i = (1+iota) y_{i+1},
// boundary-stable ladder x_0..x_W, boundary-unstable ladder x_-W..x_-1,
// d∂_su(x_-1) = (1+iota) x_0 and d_os(x_{i-1}) = y_i.

// Interior generators carry no level, so windows only cut the ladders.
inline KMDataset canonical_trn_dataset(int n, std::optional<int> window = std::nullopt) {
  if (n < 1) throw KMError("canonical_trn_dataset: n must be at least 1");
  int w = window.value_or(2 * n);
  if (w < n) throw KMError("canonical_trn_dataset: window must be at least n");
  KMDataset k;
  k.lifted = true;
  for (int i = 1; i <= n; ++i)
    k.o.push_back({"y" + std::to_string(i), i, "y" + std::to_string(i), std::nullopt});
  for (int i = 0; i <= w; ++i) k.s.push_back({"x" + std::to_string(i), i, "x", i});
  for (int i = -w; i <= -1; ++i) k.u.push_back({"x" + std::to_string(i), i + 1, "x", i});
  k.reset_matrices();
  const auto norm = GroupRingElem::norm();
  for (int i = 1; i < n; ++i) k.d_oo(i, i - 1) = norm;
  for (int i = 0; i < w; ++i) k.db_ss(i + 1, i) = norm;
  for (int i = 0; i + 1 < w; ++i) k.db_uu(i + 1, i) = norm;
  k.db_su(0, static_cast<std::size_t>(w - 1)) = norm;
  for (int i = 1; i <= n; ++i) k.d_os(i - 1, i - 1) = GroupRingElem::one();
  return k;
}

// The canonical model on an arbitrary level window.
inline KMWindowSource canonical_trn_source(int n) {
  return [n](int lo, int hi) {
    int w = std::max({n, -lo, hi});
    return restrict_window(canonical_trn_dataset(n, w), lo, hi);
  };
}

}  // namespace polarfloer
