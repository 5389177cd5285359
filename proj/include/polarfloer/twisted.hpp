// Polarization-twisted Morse complexes. Generators are pairs (x, i) of a
// critical point and an eigenvalue index. A trajectory class from x+ to x-
// with spectral flow sf is counted when
//   ind(x-) - ind(x+) + sf + i- - i+ - 1 = 0,
// so it shifts the eigenvalue index by di = 1 - (ind(x-) - ind(x+)) - sf.
// Positive and negative solutions are counted separately: the lifted
// differential is pos + neg iota, so d counts pos + neg and T counts neg plus
// the constant ladder (x, i) -> (x, i + 1).
//
// The compressed presentation identifies (x, i) with t^i x: a free
// F2[t,t^-1]-complex on the critical points with D = sum (pos + neg) t^di and
// T = t + sum neg t^di. The E1 complex writes the monodromy of an index-one
// class as t^sf; since di = -sf there, it is the compressed complex under
// t -> t^-1.
#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "polarfloer/complexes.hpp"
#include "polarfloer/equivariant.hpp"
#include "polarfloer/matrix.hpp"
#include "polarfloer/rings.hpp"
#include "polarfloer/snf.hpp"

namespace polarfloer {

using Rational = boost::rational<long long>;
using LaurentMatrix = RingMatrix<F2Laurent>;

struct TwistedPoint {
  std::string label;
  int index = 0;
  std::optional<Rational> action;
  std::optional<int> s;  // grading correction; sf(u) = s(x-) - s(x+)

  friend bool operator==(const TwistedPoint&, const TwistedPoint&) = default;
};

// A homotopy class of trajectories from source (x+) to target (x-). When
// "at" is set the entry records the counts at source eigenvalue index at;
// entries for the same class must then agree.
struct TwistedClass {
  std::string label;
  std::string source;
  std::string target;
  int sf = 0;
  bool pos = false;
  bool neg = false;
  std::optional<int> shift;  // i- - i+, checked against the dimension formula
  std::optional<int> at;

  friend bool operator==(const TwistedClass&, const TwistedClass&) = default;
};

// The class `second` after `first` (first ends where second starts).
struct TwistedComposition {
  std::string first;
  std::string second;
  std::string composite;

  friend bool operator==(const TwistedComposition&, const TwistedComposition&) = default;
};

struct TwistedDataset {
  std::vector<TwistedPoint> points;
  std::vector<TwistedClass> classes;
  std::vector<TwistedComposition> compositions;
  int window = 4;

  bool graded() const {
    if (points.empty()) return false;
    for (const auto& p : points)
      if (!p.s) return false;
    return true;
  }
};

class TwistedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A validated dataset: one entry per class, with endpoints resolved.
struct TwistedModel {
  std::vector<TwistedPoint> points;
  struct Class {
    std::string label;
    std::size_t source = 0, target = 0;
    int sf = 0;
    int shift = 0;
    bool pos = false, neg = false;
  };
  std::vector<Class> classes;
  bool graded = false;

  std::size_t size() const { return points.size(); }
  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& p : points) out.push_back(p.label);
    return out;
  }
};

inline int eigen_shift(int ind_target, int ind_source, int sf) {
  return 1 - (ind_target - ind_source) - sf;
}

inline TwistedModel validate_twisted(const TwistedDataset& tw) {
  TwistedModel m;
  m.points = tw.points;
  m.graded = tw.graded();
  std::map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < tw.points.size(); ++i)
    if (!at.emplace(tw.points[i].label, i).second)
      throw TwistedError("duplicate critical point '" + tw.points[i].label + "'");
  auto point = [&](const std::string& l, const std::string& cls) {
    auto it = at.find(l);
    if (it == at.end()) throw TwistedError("class '" + cls + "' refers to unknown point '" + l + "'");
    return it->second;
  };
  std::map<std::string, std::size_t> seen;
  std::map<std::string, const TwistedClass*> first_entry;
  for (const auto& c : tw.classes) {
    auto prev = first_entry.find(c.label);
    if (prev != first_entry.end()) {
      const TwistedClass& p = *prev->second;
      if (p.source != c.source || p.target != c.target || p.sf != c.sf)
        throw TwistedError("class '" + c.label + "' is listed with different endpoints or sf");
      if (p.pos != c.pos || p.neg != c.neg)
        throw TwistedError("counts of class '" + c.label +
                           "' are not T-equivariant: they differ between eigenvalue indices");
      continue;
    }
    first_entry.emplace(c.label, &c);
    TwistedModel::Class k;
    k.label = c.label;
    k.source = point(c.source, c.label);
    k.target = point(c.target, c.label);
    k.sf = c.sf;
    k.pos = c.pos;
    k.neg = c.neg;
    const TwistedPoint& xs = tw.points[k.source];
    const TwistedPoint& xt = tw.points[k.target];
    if (xt.index <= xs.index)
      throw TwistedError("class '" + c.label + "' does not raise the Morse index (" +
                         std::to_string(xs.index) + " -> " + std::to_string(xt.index) + ")");
    if (xs.action && xt.action && !(*xt.action > *xs.action))
      throw TwistedError("class '" + c.label + "' does not increase the action");
    if (xs.s && xt.s && c.sf != *xt.s - *xs.s)
      throw TwistedError("class '" + c.label + "' has sf " + std::to_string(c.sf) +
                         " but s(target) - s(source) = " + std::to_string(*xt.s - *xs.s));
    k.shift = eigen_shift(xt.index, xs.index, c.sf);
    if (c.shift && *c.shift != k.shift)
      throw TwistedError("class '" + c.label + "' is not admissible: shift " +
                         std::to_string(*c.shift) + " but the dimension formula needs " +
                         std::to_string(k.shift));
    seen.emplace(c.label, m.classes.size());
    m.classes.push_back(k);
  }
  for (const auto& comp : tw.compositions) {
    auto get = [&](const std::string& l) -> const TwistedModel::Class& {
      auto it = seen.find(l);
      if (it == seen.end()) throw TwistedError("composition refers to unknown class '" + l + "'");
      return m.classes[it->second];
    };
    const auto& a = get(comp.first);
    const auto& b = get(comp.second);
    const auto& c = get(comp.composite);
    if (a.target != b.source || c.source != a.source || c.target != b.target)
      throw TwistedError("composition " + comp.first + " then " + comp.second +
                         " has mismatched endpoints");
    if (a.sf + b.sf != c.sf)
      throw TwistedError("sf is not additive on " + comp.first + " then " + comp.second + ": " +
                         std::to_string(a.sf) + " + " + std::to_string(b.sf) +
                         " != " + std::to_string(c.sf));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Compressed presentation.

struct CompressedCounts {
  LaurentMatrix pos, neg;  // rows target, cols source
};

inline CompressedCounts compressed_counts(const TwistedModel& m) {
  std::size_t n = m.size();
  CompressedCounts c{LaurentMatrix(n, n), LaurentMatrix(n, n)};
  for (const auto& k : m.classes) {
    F2Laurent mono = F2Laurent::monomial(k.shift);
    if (k.pos) c.pos(k.target, k.source) += mono;
    if (k.neg) c.neg(k.target, k.source) += mono;
  }
  return c;
}

// The lifted differential pos + neg iota + (1 + iota) t squares to zero iff
// pos^2 + neg^2 = 0 and pos neg + neg pos = 0.
struct LiftCheck {
  bool ok = true;
  std::string witness;
};

inline LiftCheck check_lift(const CompressedCounts& c) {
  LiftCheck out;
  LaurentMatrix sq = c.pos * c.pos + c.neg * c.neg;
  LaurentMatrix mix = c.pos * c.neg + c.neg * c.pos;
  if (!sq.is_zero()) {
    out.ok = false;
    out.witness += "pos^2 + neg^2 =\n" + sq.str();
  }
  if (!mix.is_zero()) {
    out.ok = false;
    out.witness += "pos neg + neg pos =\n" + mix.str();
  }
  return out;
}

struct TwistedComplex {
  TwistedModel model;
  LaurentComplex compressed;  // D on critical points
  LaurentMatrix T;            // t + neg
};

inline LaurentMatrix laurent_reciprocal(const LaurentMatrix& m) {
  return m.map<F2Laurent>([](const F2Laurent& x) { return x.reciprocal(); });
}

inline TwistedComplex build_twisted(const TwistedDataset& tw) {
  TwistedComplex out;
  out.model = validate_twisted(tw);
  CompressedCounts c = compressed_counts(out.model);
  LiftCheck lc = check_lift(c);
  if (!lc.ok) throw TwistedError("lifted differential does not square to zero:\n" + lc.witness);
  std::optional<std::vector<int>> g;
  if (out.model.graded) {
    std::vector<int> gg;
    for (const auto& p : out.model.points) gg.push_back(p.index + *p.s);
    g = gg;
  }
  try {
    out.compressed = LaurentComplex(out.model.labels(), c.pos + c.neg, g);
  } catch (const ComplexError& e) {
    throw TwistedError(std::string("compressed complex is invalid: ") + e.what());
  }
  out.T = LaurentMatrix::scalar(out.model.size(), F2Laurent::monomial(1)) + c.neg;
  return out;
}

inline ModuleReport<F2Laurent> twisted_homology(const TwistedComplex& tc) {
  return homology(tc.compressed);
}

// T commutes with D and is invertible over F2[t,t^-1]; then it induces an
// isomorphism on homology.
struct TInvertibility {
  bool chain_map = false;
  bool invertible = false;
  bool holds() const { return chain_map && invertible; }
};

inline TInvertibility verify_T_invertible(const TwistedComplex& tc) {
  TInvertibility r;
  const LaurentMatrix& d = tc.compressed.d();
  r.chain_map = tc.T * d == d * tc.T;
  r.invertible = is_invertible(tc.T);
  return r;
}

// ---------------------------------------------------------------------------
// Windows. A window [lo, hi] keeps the generators whose weight lies in it.
// For graded data the weight is the degree ind + s + i. Otherwise it is
// i + c ind(x), with c the least non-negative integer such that no class
// lowers the weight. Either way windows are subquotients, so d and T
// restrict.

inline int window_slope(const TwistedModel& m) {
  int c = 0;
  for (const auto& k : m.classes) {
    int gap = m.points[k.target].index - m.points[k.source].index;
    int need = k.shift >= 0 ? 0 : (-k.shift + gap - 1) / gap;
    c = std::max(c, need);
  }
  return c;
}

// Weight of (x, i) is i plus this offset.
inline int ladder_offset(const TwistedModel& m, std::size_t x, int slope) {
  const auto& p = m.points[x];
  return m.graded ? p.index + *p.s : slope * p.index;
}

struct TwistedGenerator {
  std::size_t point = 0;
  int i = 0;
};

struct TwistedWindow {
  std::vector<TwistedGenerator> generators;
  Z2FreeComplex lifted;
  TComplex tcomplex;
};

inline TwistedWindow twisted_window(const TwistedModel& m, int lo, int hi) {
  int c = window_slope(m);
  auto offset = [&](std::size_t x) { return ladder_offset(m, x, c); };
  TwistedWindow out;
  std::map<std::pair<std::size_t, int>, std::size_t> where;
  for (int w = lo; w <= hi; ++w)
    for (std::size_t x = 0; x < m.size(); ++x) {
      int i = w - offset(x);
      where[{x, i}] = out.generators.size();
      out.generators.push_back({x, i});
    }
  std::size_t n = out.generators.size();
  Z2Matrix d(n, n);
  std::vector<std::string> labels;
  std::vector<int> grading;
  for (std::size_t col = 0; col < n; ++col) {
    auto [x, i] = out.generators[col];
    labels.push_back(m.points[x].label + "@" + std::to_string(i));
    grading.push_back(i + offset(x));
    auto ladder = where.find({x, i + 1});
    if (ladder != where.end()) d(ladder->second, col) += GroupRingElem::norm();
    for (const auto& k : m.classes) {
      if (k.source != x) continue;
      auto it = where.find({k.target, i + k.shift});
      if (it == where.end()) continue;
      d(it->second, col) += GroupRingElem(k.pos, k.neg);
    }
  }
  std::optional<std::vector<int>> g;
  if (m.graded) g = grading;
  try {
    out.lifted = Z2FreeComplex(std::move(labels), std::move(d), std::move(g));
  } catch (const ComplexError& e) {
    throw TwistedError(std::string("windowed complex is invalid: ") + e.what());
  }
  out.tcomplex = a_f2(out.lifted);
  return out;
}

// For graded data: the homology of the window [-N, N] in each interior degree
// -N < k < N is that of the full complex. Windows N and N + 1 must agree
// there, and each such dimension is the free rank of the compressed homology.
struct WindowStability {
  bool applicable = false;
  std::map<int, std::size_t> at_n, at_n1;
  std::size_t compressed_rank = 0;
  bool holds() const {
    if (!applicable) return false;
    for (const auto& [k, dim] : at_n) {
      auto it = at_n1.find(k);
      if (it == at_n1.end() || it->second != dim || dim != compressed_rank) return false;
    }
    return true;
  }
};

inline WindowStability window_stability(const TwistedComplex& tc, int window) {
  WindowStability w;
  w.compressed_rank = twisted_homology(tc).free_rank;
  if (!tc.model.graded || window < 1) return w;
  w.applicable = true;
  w.at_n = degree_dims(twisted_window(tc.model, -window, window).tcomplex.c, 1 - window, window - 1);
  w.at_n1 = degree_dims(twisted_window(tc.model, -window - 1, window + 1).tcomplex.c, 1 - window,
                        window - 1);
  return w;
}

// ---------------------------------------------------------------------------
// The spectral sequence of the Morse index filtration.

// E1 complex: free on critical points, entry sum of t^sf over index-one
// classes with odd total count.
inline LaurentComplex e1_complex(const TwistedModel& m) {
  std::size_t n = m.size();
  LaurentMatrix d(n, n);
  for (const auto& k : m.classes) {
    if (m.points[k.target].index - m.points[k.source].index != 1) continue;
    if (k.pos != k.neg) d(k.target, k.source) += F2Laurent::monomial(k.sf);
  }
  std::vector<int> levels;
  for (const auto& p : m.points) levels.push_back(p.index);
  try {
    return LaurentComplex(m.labels(), std::move(d), std::nullopt, std::move(levels));
  } catch (const ComplexError& e) {
    throw TwistedError(std::string("E1 differential does not square to zero: ") + e.what());
  }
}

inline ModuleReport<F2Laurent> e2_page(const TwistedDataset& tw) {
  return homology(e1_complex(validate_twisted(tw)));
}

// The compressed complex in the E1 convention, filtered by Morse index.
inline LaurentComplex index_filtered(const TwistedComplex& tc) {
  std::vector<int> levels;
  for (const auto& p : tc.model.points) levels.push_back(p.index);
  return LaurentComplex(tc.model.labels(), laurent_reciprocal(tc.compressed.d()), std::nullopt,
                        std::move(levels));
}

inline SpectralPages<F2Laurent> twisted_spectral_pages(const TwistedComplex& tc, int up_to_page) {
  return spectral_pages(index_filtered(tc), up_to_page);
}

// ---------------------------------------------------------------------------
// Two critical points and the Porteous coefficient.

// <w_n(-eta), [M]> where w(-eta) = w(eta)^-1 in one generator and the
// pairing gives <w^n, [M]>.
inline Gf2 porteous_coefficient(const F2Poly& total_sw, int n, Gf2 pairing) {
  if (!total_sw.coeff(0))
    throw std::invalid_argument("porteous_coefficient: total class must have constant term 1");
  if (n < 0) throw std::invalid_argument("porteous_coefficient: negative degree");
  F2Poly inv = laurent_inverse_series(total_sw, n);
  return Gf2(inv.coeff(n) && pairing.v);
}

// Points p (index 0) and q (index n + 1) with one class of sf 0 carrying
// sw_number positive solutions.
inline TwistedDataset two_point_dataset(int n, Gf2 sw_number) {
  if (n < 1) throw std::invalid_argument("two_point_dataset: n must be at least 1");
  TwistedDataset tw;
  tw.points = {{"p", 0, std::nullopt, std::nullopt}, {"q", n + 1, std::nullopt, std::nullopt}};
  if (sw_number.v) tw.classes.push_back({"u", "p", "q", 0, true, false, std::nullopt, std::nullopt});
  return tw;
}

inline ModuleReport<F2Laurent> two_point_twisted(int n, Gf2 sw_number) {
  return twisted_homology(build_twisted(two_point_dataset(n, sw_number)));
}

}  // namespace polarfloer
