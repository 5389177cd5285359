// Z/2-equivariant Floer data on a double cover: free pairs {y, iota y} of
// non-invariant generators, invariant points with their twisted boundary
// classes, and interior counts. A window of ladder weights turns this into a
// Morse-KM dataset whose C̄ is the windowed twisted complex.
//
// Interior counts carry the index mu in the cover. The eigenvalue indices of
// the ladder ends follow from mu:
//   oo  pair -> pair          mu = 1
//   os  (x, i) -> pair        i = mu - 1 >= 0
//   uo  pair -> (x, i)        i = -mu < 0
//   us  (x, i+) -> (x', i-)   i- = i+ - mu, i+ >= 0 > i-
#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polarfloer/complexes.hpp"
#include "polarfloer/equivariant.hpp"
#include "polarfloer/matrix.hpp"
#include "polarfloer/morse_km.hpp"
#include "polarfloer/patterns.hpp"
#include "polarfloer/rings.hpp"
#include "polarfloer/snf.hpp"
#include "polarfloer/twisted.hpp"

namespace polarfloer {

class EquivariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InteriorKind { oo, os, uo, us };

inline std::string interior_kind_name(InteriorKind k) {
  switch (k) {
    case InteriorKind::oo: return "oo";
    case InteriorKind::os: return "os";
    case InteriorKind::uo: return "uo";
    case InteriorKind::us: return "us";
  }
  return "";
}

inline InteriorKind parse_interior_kind(const std::string& s) {
  if (s == "oo") return InteriorKind::oo;
  if (s == "os") return InteriorKind::os;
  if (s == "uo") return InteriorKind::uo;
  if (s == "us") return InteriorKind::us;
  throw EquivariantError("unknown interior count kind '" + s + "' (expected oo, os, uo, us)");
}

// The distinguished representative y of a free pair; its partner is "i." + label.
struct EquivariantPair {
  std::string label;
  std::optional<Rational> action;
  std::optional<int> degree;

  friend bool operator==(const EquivariantPair&, const EquivariantPair&) = default;
};

struct InteriorCount {
  InteriorKind kind = InteriorKind::oo;
  std::string source;
  std::string target;
  int mu = 1;
  GroupRingElem coeff = GroupRingElem::one();
  std::optional<int> source_index;  // required for us
  std::optional<int> target_index;  // checked when given

  friend bool operator==(const InteriorCount&, const InteriorCount&) = default;
};

// d_up(source) contains target, in the non-equivariant complex upstairs.
struct UpstairsEntry {
  std::string source;
  std::string target;

  friend bool operator==(const UpstairsEntry&, const UpstairsEntry&) = default;
};

struct EquivariantDataset {
  std::vector<EquivariantPair> pairs;
  TwistedDataset boundary;
  std::vector<InteriorCount> interior;
  std::optional<std::vector<UpstairsEntry>> upstairs;
  bool equivariant_regular = false;
  int window = 4;
};

// A validated dataset with resolved endpoints.
struct EquivariantModel {
  struct Count {
    InteriorKind kind = InteriorKind::oo;
    std::size_t source = 0, target = 0;
    int i_source = 0, i_target = 0;
    GroupRingElem coeff;
  };

  EquivariantDataset data;
  TwistedModel twisted;
  std::vector<Count> counts;
  int slope = 0;
  int reach = 0;        // referenced ladder generators have |weight| <= reach
  bool graded = false;  // pairs carry degrees and the twisted side is graded

  // Upstairs complex on points, pairs and partners, in that order.
  bool has_upstairs = false;
  std::vector<std::string> up_labels;
  F2Matrix up_d, up_iota;

  std::size_t pair_count() const { return data.pairs.size(); }
  std::size_t point_count() const { return twisted.size(); }
  int offset(std::size_t x) const { return ladder_offset(twisted, x, slope); }
  int weight(std::size_t x, int i) const { return i + offset(x); }
  std::size_t up_point(std::size_t x) const { return x; }
  std::size_t up_pair(std::size_t y) const { return point_count() + y; }
  std::size_t up_partner(std::size_t y) const { return point_count() + pair_count() + y; }
};

namespace detail {

inline std::string ladder_name(const TwistedModel& m, std::size_t x, int i) {
  return m.points[x].label + "@" + std::to_string(i);
}

inline void check_interior_degree(const EquivariantModel& m, const InteriorCount& c,
                                  const EquivariantModel::Count& k) {
  if (!m.graded) return;
  // Native degrees: pair y -> degree(y), (x, i) in s -> deg + i, (x, i) in u -> deg + i + 1.
  auto ladder = [&](std::size_t x, int i) { return m.weight(x, i) + (i < 0 ? 1 : 0); };
  auto pair = [&](std::size_t y) { return *m.data.pairs[y].degree; };
  int from = 0, to = 0;
  switch (k.kind) {
    case InteriorKind::oo: from = pair(k.source), to = pair(k.target); break;
    case InteriorKind::os: from = ladder(k.source, k.i_source), to = pair(k.target); break;
    case InteriorKind::uo: from = pair(k.source), to = ladder(k.target, k.i_target); break;
    case InteriorKind::us:
      from = ladder(k.source, k.i_source), to = ladder(k.target, k.i_target);
      break;
  }
  if (to - from != 1)
    throw EquivariantError("interior count " + interior_kind_name(c.kind) + " " + c.source + " -> " +
                           c.target + " changes the degree by " + std::to_string(to - from) +
                           ", expected 1");
}

}  // namespace detail

inline EquivariantModel validate_equivariant(const EquivariantDataset& e) {
  EquivariantModel m;
  m.data = e;
  build_twisted(e.boundary);  // validates the classes and the lift
  m.twisted = validate_twisted(e.boundary);
  m.slope = window_slope(m.twisted);
  if (e.window < 0) throw EquivariantError("window must be non-negative");

  std::map<std::string, std::size_t> pair_at, point_at;
  for (std::size_t x = 0; x < m.twisted.size(); ++x) point_at[m.twisted.points[x].label] = x;
  std::set<std::string> names;
  for (const auto& p : m.twisted.points) names.insert(p.label);
  bool degrees = true;
  for (std::size_t y = 0; y < e.pairs.size(); ++y) {
    const auto& p = e.pairs[y];
    if (p.label.empty()) throw EquivariantError("pair with empty label");
    if (!names.insert(p.label).second || !names.insert("i." + p.label).second)
      throw EquivariantError("label '" + p.label + "' is used twice");
    pair_at[p.label] = y;
    if (!p.degree) degrees = false;
  }
  m.graded = m.twisted.graded && degrees;
  if (!m.twisted.graded && m.twisted.size() == 0) m.graded = degrees;

  auto pair = [&](const std::string& l) {
    auto it = pair_at.find(l);
    if (it == pair_at.end()) throw EquivariantError("interior count refers to unknown pair '" + l + "'");
    return it->second;
  };
  auto point = [&](const std::string& l) {
    auto it = point_at.find(l);
    if (it == point_at.end())
      throw EquivariantError("interior count refers to unknown invariant point '" + l + "'");
    return it->second;
  };
  auto check_index = [](const std::optional<int>& given, int want, const InteriorCount& c) {
    if (given && *given != want)
      throw EquivariantError("interior count " + interior_kind_name(c.kind) + " " + c.source +
                             " -> " + c.target + " with mu " + std::to_string(c.mu) +
                             " has eigenvalue index " + std::to_string(*given) +
                             " but the dimension formula needs " + std::to_string(want));
  };
  auto action_of_pair = [&](std::size_t y) { return e.pairs[y].action; };
  auto action_of_point = [&](std::size_t x) { return m.twisted.points[x].action; };

  for (const auto& c : e.interior) {
    if (c.coeff.is_zero()) continue;
    EquivariantModel::Count k;
    k.kind = c.kind;
    k.coeff = c.coeff;
    std::optional<Rational> a_src, a_tgt;
    switch (c.kind) {
      case InteriorKind::oo:
        k.source = pair(c.source);
        k.target = pair(c.target);
        if (c.mu != 1)
          throw EquivariantError("pair-to-pair count " + c.source + " -> " + c.target +
                                 " must have mu 1, got " + std::to_string(c.mu));
        a_src = action_of_pair(k.source), a_tgt = action_of_pair(k.target);
        break;
      case InteriorKind::os:
        k.source = point(c.source);
        k.target = pair(c.target);
        k.i_source = c.mu - 1;
        if (k.i_source < 0)
          throw EquivariantError("count " + c.source + " -> " + c.target +
                                 " from a boundary-stable generator needs mu >= 1");
        check_index(c.source_index, k.i_source, c);
        a_src = action_of_point(k.source), a_tgt = action_of_pair(k.target);
        break;
      case InteriorKind::uo:
        k.source = pair(c.source);
        k.target = point(c.target);
        k.i_target = -c.mu;
        if (k.i_target >= 0)
          throw EquivariantError("count " + c.source + " -> " + c.target +
                                 " into a boundary-unstable generator needs mu >= 1");
        check_index(c.target_index, k.i_target, c);
        a_src = action_of_pair(k.source), a_tgt = action_of_point(k.target);
        break;
      case InteriorKind::us:
        k.source = point(c.source);
        k.target = point(c.target);
        if (!c.source_index)
          throw EquivariantError("boundary-obstructed count " + c.source + " -> " + c.target +
                                 " needs a source eigenvalue index");
        k.i_source = *c.source_index;
        k.i_target = k.i_source - c.mu;
        if (k.i_source < 0 || k.i_target >= 0)
          throw EquivariantError("boundary-obstructed count " + c.source + " -> " + c.target +
                                 " must run from index >= 0 to index < 0, got " +
                                 std::to_string(k.i_source) + " -> " + std::to_string(k.i_target));
        check_index(c.target_index, k.i_target, c);
        a_src = action_of_point(k.source), a_tgt = action_of_point(k.target);
        break;
    }
    if (a_src && a_tgt && !(*a_tgt > *a_src) && !(c.kind == InteriorKind::us && k.source == k.target))
      throw EquivariantError("interior count " + c.source + " -> " + c.target +
                             " does not increase the action");
    detail::check_interior_degree(m, c, k);
    if (c.kind == InteriorKind::os || c.kind == InteriorKind::us)
      m.reach = std::max(m.reach, std::abs(m.weight(k.source, k.i_source)));
    if (c.kind == InteriorKind::uo || c.kind == InteriorKind::us)
      m.reach = std::max(m.reach, std::abs(m.weight(k.target, k.i_target)));
    m.counts.push_back(k);
  }

  if (e.upstairs) {
    m.has_upstairs = true;
    std::size_t np = m.point_count(), ny = m.pair_count(), n = np + 2 * ny;
    std::map<std::string, std::size_t> at;
    for (std::size_t x = 0; x < np; ++x) {
      m.up_labels.push_back(m.twisted.points[x].label);
      at[m.up_labels.back()] = x;
    }
    for (std::size_t y = 0; y < ny; ++y) {
      m.up_labels.push_back(e.pairs[y].label);
      at[e.pairs[y].label] = m.up_pair(y);
    }
    for (std::size_t y = 0; y < ny; ++y) {
      m.up_labels.push_back("i." + e.pairs[y].label);
      at["i." + e.pairs[y].label] = m.up_partner(y);
    }
    auto up = [&](const std::string& l) {
      auto it = at.find(l);
      if (it == at.end()) throw EquivariantError("upstairs entry refers to unknown generator '" + l + "'");
      return it->second;
    };
    m.up_d = F2Matrix(n, n);
    for (const auto& u : *e.upstairs) m.up_d(up(u.target), up(u.source)) += Gf2(true);
    m.up_iota = F2Matrix(n, n);
    for (std::size_t x = 0; x < np; ++x) m.up_iota(x, x) = Gf2(true);
    for (std::size_t y = 0; y < ny; ++y) {
      m.up_iota(m.up_pair(y), m.up_partner(y)) = Gf2(true);
      m.up_iota(m.up_partner(y), m.up_pair(y)) = Gf2(true);
    }
    if (!(m.up_d * m.up_d).is_zero())
      throw EquivariantError("upstairs differential does not square to zero");
    if (!(m.up_d * m.up_iota == m.up_iota * m.up_d))
      throw EquivariantError("upstairs differential does not commute with the involution");
  }
  return m;
}

// ---------------------------------------------------------------------------
// KM datasets on weight windows.

// Covers the interior counts and the base of every ladder.
inline int default_window(const EquivariantModel& m) {
  int w = std::max(m.data.window, m.reach);
  for (std::size_t x = 0; x < m.point_count(); ++x) w = std::max(w, std::abs(m.offset(x)) + 1);
  return w;
}

// Ladder generators (x, i) with weight in [lo, hi]; s for i >= 0, u for i < 0.
// Interior counts must land inside the window.
inline KMDataset equivariant_km(const EquivariantModel& m, int lo, int hi) {
  TwistedWindow tw = twisted_window(m.twisted, lo, hi);
  KMDataset k;
  k.lifted = true;
  std::vector<std::size_t> s_idx, u_idx;
  std::map<std::pair<std::size_t, int>, std::size_t> s_at, u_at;
  for (std::size_t g = 0; g < tw.generators.size(); ++g) {
    auto [x, i] = tw.generators[g];
    int w = m.weight(x, i);
    std::optional<int> grade;
    if (m.graded) grade = i >= 0 ? w : w + 1;
    KMGenerator gen{detail::ladder_name(m.twisted, x, i), grade, m.twisted.points[x].label, w};
    if (i >= 0) {
      s_at[{x, i}] = k.s.size();
      s_idx.push_back(g);
      k.s.push_back(gen);
    } else {
      u_at[{x, i}] = k.u.size();
      u_idx.push_back(g);
      k.u.push_back(gen);
    }
  }
  for (const auto& p : m.data.pairs) {
    std::optional<int> grade;
    if (m.graded) grade = p.degree;
    k.o.push_back({p.label, grade, std::nullopt, std::nullopt});
  }
  k.reset_matrices();
  const Z2Matrix& d = tw.lifted.d();
  k.db_ss = d.submatrix(s_idx, s_idx);
  k.db_su = d.submatrix(s_idx, u_idx);
  k.db_us = d.submatrix(u_idx, s_idx);
  k.db_uu = d.submatrix(u_idx, u_idx);

  auto find = [&](const std::map<std::pair<std::size_t, int>, std::size_t>& at, std::size_t x, int i) {
    auto it = at.find({x, i});
    if (it == at.end())
      throw EquivariantError("window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                             "] is too small: an interior count needs " +
                             detail::ladder_name(m.twisted, x, i));
    return it->second;
  };
  for (const auto& c : m.counts) switch (c.kind) {
      case InteriorKind::oo: k.d_oo(c.target, c.source) += c.coeff; break;
      case InteriorKind::os: k.d_os(c.target, find(s_at, c.source, c.i_source)) += c.coeff; break;
      case InteriorKind::uo: k.d_uo(find(u_at, c.target, c.i_target), c.source) += c.coeff; break;
      case InteriorKind::us:
        k.d_us(find(u_at, c.target, c.i_target), find(s_at, c.source, c.i_source)) += c.coeff;
        break;
    }
  return k;
}

inline KMWindowSource equivariant_source(const EquivariantModel& m) {
  return [m](int lo, int hi) { return equivariant_km(m, lo, hi); };
}

struct EquivariantAssembly {
  EquivariantModel model;
  int window = 0;
  KMDataset km;
  KMTriple triple;
};

inline EquivariantAssembly assemble_equivariant(const EquivariantDataset& e,
                                                std::optional<int> window = std::nullopt) {
  EquivariantAssembly a;
  a.model = validate_equivariant(e);
  a.window = window.value_or(default_window(a.model));
  if (a.window < a.model.reach)
    throw EquivariantError("window " + std::to_string(a.window) +
                           " is too small: interior counts reach weight " +
                           std::to_string(a.model.reach));
  a.km = equivariant_km(a.model, -a.window, a.window);
  a.triple = assemble(a.km);
  return a;
}

// ---------------------------------------------------------------------------
// Standard datasets and closure operations.

// Invariant point x, pairs y_1..y_n with d y_i = (1 + iota) y_(i+1) and
// d_os(x@(i-1)) = y_i; upstairs d x = (1 + iota) y_1.
inline EquivariantDataset canonical_trn_equivariant(int n) {
  if (n < 0) throw EquivariantError("canonical_trn_equivariant: n must be non-negative");
  EquivariantDataset e;
  e.equivariant_regular = true;
  e.boundary.points.push_back({"x", 0, std::nullopt, 0});
  std::vector<UpstairsEntry> up;
  for (int i = 1; i <= n; ++i) {
    std::string y = "y" + std::to_string(i);
    e.pairs.push_back({y, Rational(i), i});
    e.interior.push_back({InteriorKind::os, "x", y, i, GroupRingElem::one(), std::nullopt, std::nullopt});
    if (i == 1) {
      up.push_back({"x", y});
      up.push_back({"x", "i." + y});
    }
    if (i < n) {
      std::string z = "y" + std::to_string(i + 1);
      e.interior.push_back({InteriorKind::oo, y, z, 1, GroupRingElem::norm(), std::nullopt, std::nullopt});
      for (const auto& a : {y, "i." + y})
        for (const auto& b : {z, "i." + z}) up.push_back({a, b});
    }
  }
  e.upstairs = up;
  return e;
}

// One free pair with zero differential.
inline EquivariantDataset point_pair_dataset() {
  EquivariantDataset e;
  e.equivariant_regular = true;
  e.pairs.push_back({"y", std::nullopt, 0});
  e.upstairs = std::vector<UpstairsEntry>{};
  return e;
}

// One invariant point and nothing else.
inline EquivariantDataset single_point_dataset() {
  EquivariantDataset e;
  e.equivariant_regular = true;
  e.boundary.points.push_back({"x", 0, std::nullopt, 0});
  e.upstairs = std::vector<UpstairsEntry>{};
  return e;
}

namespace detail {

inline bool is_partner_label(const EquivariantDataset& e, const std::string& l) {
  if (l.rfind("i.", 0) != 0) return false;
  std::string rest = l.substr(2);
  for (const auto& p : e.pairs)
    if (p.label == rest) return true;
  return false;
}

// Applies f to generator labels, keeping partners as "i." + f(pair).
template <class F>
std::string map_up_label(const EquivariantDataset& e, const std::string& l, F f) {
  return is_partner_label(e, l) ? "i." + f(l.substr(2)) : f(l);
}

inline void append_prefixed(EquivariantDataset& out, const EquivariantDataset& e, const std::string& pre) {
  auto f = [&](const std::string& l) { return pre + l; };
  for (auto p : e.pairs) {
    p.label = f(p.label);
    out.pairs.push_back(p);
  }
  for (auto p : e.boundary.points) {
    p.label = f(p.label);
    out.boundary.points.push_back(p);
  }
  for (auto c : e.boundary.classes) {
    c.label = f(c.label), c.source = f(c.source), c.target = f(c.target);
    out.boundary.classes.push_back(c);
  }
  for (auto c : e.boundary.compositions) {
    c.first = f(c.first), c.second = f(c.second), c.composite = f(c.composite);
    out.boundary.compositions.push_back(c);
  }
  for (auto c : e.interior) {
    c.source = f(c.source), c.target = f(c.target);
    out.interior.push_back(c);
  }
  if (e.upstairs && out.upstairs)
    for (const auto& u : *e.upstairs)
      out.upstairs->push_back({map_up_label(e, u.source, f), map_up_label(e, u.target, f)});
}

}  // namespace detail

inline EquivariantDataset eq_direct_sum(const EquivariantDataset& a, const EquivariantDataset& b,
                                        const std::string& pa = "a.", const std::string& pb = "b.") {
  EquivariantDataset out;
  out.equivariant_regular = a.equivariant_regular && b.equivariant_regular;
  out.window = std::max(a.window, b.window);
  out.boundary.window = std::max(a.boundary.window, b.boundary.window);
  if (a.upstairs && b.upstairs) out.upstairs = std::vector<UpstairsEntry>{};
  detail::append_prefixed(out, a, pa);
  detail::append_prefixed(out, b, pb);
  return out;
}

// e (x) v for a graded F2 complex v with trivial involution: indices and
// degrees add, every count is tensored with the identity, and d_v adds
// index-one classes of spectral flow 0 and pair-to-pair counts.
inline EquivariantDataset eq_tensor(const EquivariantDataset& e, const F2Complex& v) {
  if (!v.graded()) throw EquivariantError("eq_tensor needs a graded complex");
  const auto& L = v.labels();
  const auto& g = v.grading();
  std::size_t n = v.size();
  auto name = [](const std::string& a, const std::string& b) { return a + "*" + b; };
  EquivariantDataset out;
  out.equivariant_regular = e.equivariant_regular;
  out.window = e.window;
  out.boundary.window = e.boundary.window;
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& p : e.pairs) {
      std::optional<int> d;
      if (p.degree) d = *p.degree + g[k];
      out.pairs.push_back({name(p.label, L[k]), std::nullopt, d});
    }
    for (const auto& p : e.boundary.points)
      out.boundary.points.push_back({name(p.label, L[k]), p.index + g[k], std::nullopt, p.s});
    for (const auto& c : e.boundary.classes)
      out.boundary.classes.push_back({name(c.label, L[k]), name(c.source, L[k]), name(c.target, L[k]),
                                      c.sf, c.pos, c.neg, c.shift, c.at});
    for (const auto& c : e.interior) {
      InteriorCount t = c;
      t.source = name(c.source, L[k]);
      t.target = name(c.target, L[k]);
      out.interior.push_back(t);
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      if (!v.d()(i, j).v) continue;
      for (const auto& p : e.boundary.points)
        out.boundary.classes.push_back({name(p.label, "d:" + L[j] + ">" + L[i]), name(p.label, L[j]),
                                        name(p.label, L[i]), 0, true, false, std::nullopt, std::nullopt});
      for (const auto& p : e.pairs)
        out.interior.push_back({InteriorKind::oo, name(p.label, L[j]), name(p.label, L[i]), 1,
                                GroupRingElem::one(), std::nullopt, std::nullopt});
    }
  if (e.upstairs) {
    std::vector<UpstairsEntry> up;
    std::vector<std::string> gens;
    for (const auto& p : e.boundary.points) gens.push_back(p.label);
    for (const auto& p : e.pairs) {
      gens.push_back(p.label);
      gens.push_back("i." + p.label);
    }
    for (std::size_t k = 0; k < n; ++k) {
      auto f = [&](const std::string& l) { return name(l, L[k]); };
      for (const auto& u : *e.upstairs)
        up.push_back({detail::map_up_label(e, u.source, f), detail::map_up_label(e, u.target, f)});
    }
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        if (!v.d()(i, j).v) continue;
        for (const auto& a : gens) {
          auto fj = [&](const std::string& l) { return name(l, L[j]); };
          auto fi = [&](const std::string& l) { return name(l, L[i]); };
          up.push_back({detail::map_up_label(e, a, fj), detail::map_up_label(e, a, fi)});
        }
      }
    out.upstairs = up;
  }
  return out;
}

// Takes iota y as the distinguished representative of the pair y.
inline EquivariantDataset flip_pair(const EquivariantDataset& e, const std::string& y) {
  bool found = false;
  for (const auto& p : e.pairs) found = found || p.label == y;
  if (!found) throw EquivariantError("flip_pair: unknown pair '" + y + "'");
  EquivariantDataset out = e;
  for (auto& c : out.interior) {
    bool s = c.source == y, t = c.target == y;
    if (s != t) c.coeff = c.coeff.conj_iota();
  }
  if (out.upstairs)
    for (auto& u : *out.upstairs)
      for (auto* l : {&u.source, &u.target}) {
        if (*l == y) *l = "i." + y;
        else if (*l == "i." + y) *l = y;
      }
  return out;
}

// Takes the opposite sign of every eigenvector at the invariant point x.
inline EquivariantDataset flip_point(const EquivariantDataset& e, const std::string& x) {
  bool found = false;
  for (const auto& p : e.boundary.points) found = found || p.label == x;
  if (!found) throw EquivariantError("flip_point: unknown point '" + x + "'");
  EquivariantDataset out = e;
  for (auto& c : out.boundary.classes)
    if ((c.source == x) != (c.target == x)) std::swap(c.pos, c.neg);
  for (auto& c : out.interior)
    if ((c.source == x) != (c.target == x)) c.coeff = c.coeff.conj_iota();
  return out;
}

// ---------------------------------------------------------------------------
// The rank inequality.

struct SmithReport {
  std::size_t upstairs_dim = 0;
  std::size_t twisted_rank = 0;
  bool holds() const { return upstairs_dim >= twisted_rank; }
  bool equality() const { return upstairs_dim == twisted_rank; }
};

inline SmithReport smith_report(const EquivariantDataset& e) {
  EquivariantModel m = validate_equivariant(e);
  if (!m.has_upstairs)
    throw EquivariantError("the rank inequality needs the non-equivariant complex upstairs");
  SmithReport r;
  r.upstairs_dim = F2Homology(m.up_d).dim();
  r.twisted_rank = twisted_homology(build_twisted(e.boundary)).free_rank;
  return r;
}

// ---------------------------------------------------------------------------
// The comparison map G from the Borel model of the upstairs complex to Č.
// G(t^k b) = T^k G0(b) with G0(x) = (x, 0), G0(y) = y, G0(iota y) = 0.

struct GMap {
  int window = 0;
  F2Matrix g0;            // Č window <- upstairs
  TComplex check;         // Č on the window
  bool chain_map = false; // G0 d_up + T G0 (1 + iota) = d_Č G0
  std::vector<std::string> violations;
};

namespace detail {

inline std::map<std::string, std::size_t> label_index(const std::vector<std::string>& labels) {
  std::map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < labels.size(); ++i) at[labels[i]] = i;
  return at;
}

inline F2Matrix g0_matrix(const EquivariantModel& m, const std::vector<std::string>& check_labels) {
  auto at = label_index(check_labels);
  F2Matrix g(check_labels.size(), m.up_labels.size());
  for (std::size_t x = 0; x < m.point_count(); ++x) {
    auto it = at.find(ladder_name(m.twisted, x, 0));
    if (it != at.end()) g(it->second, m.up_point(x)) = Gf2(true);
  }
  for (std::size_t y = 0; y < m.pair_count(); ++y) g(at.at(m.data.pairs[y].label), m.up_pair(y)) = Gf2(true);
  return g;
}

// The count coincidences that make G a chain map.
inline std::vector<std::string> coincidence_violations(const EquivariantModel& m, const KMDataset& k) {
  std::vector<std::string> out;
  auto s_at = label_index(part_labels(k.s));
  auto u_at = label_index(part_labels(k.u));
  auto aug = [](GroupRingElem c) { return c.augment().v; };
  auto up = [&](std::size_t to, std::size_t from) { return m.up_d(to, from).v; };
  for (const auto& c : m.twisted.classes)
    if (c.sf < 0) out.push_back("class '" + c.label + "' has negative spectral flow");
  for (std::size_t x = 0; x < m.point_count(); ++x) {
    std::size_t s0 = s_at.at(ladder_name(m.twisted, x, 0));
    auto um = u_at.find(ladder_name(m.twisted, x, -1));
    for (std::size_t y = 0; y < m.pair_count(); ++y) {
      const std::string& yl = m.data.pairs[y].label;
      bool lhs = aug(k.d_os(y, s0)), rhs = up(m.up_pair(y), x);
      if (lhs != rhs) out.push_back("d_os(" + m.twisted.points[x].label + "@0, " + yl + ") != <d " + m.twisted.points[x].label + ", " + yl + ">");
      bool l2 = um != u_at.end() && aug(k.d_uo(um->second, y)), r2 = up(x, m.up_pair(y));
      if (l2 != r2) out.push_back("d_uo(" + yl + ", " + m.twisted.points[x].label + "@-1) != <d " + yl + ", " + m.twisted.points[x].label + ">");
    }
    for (std::size_t x2 = 0; x2 < m.point_count(); ++x2) {
      std::size_t t0 = s_at.at(ladder_name(m.twisted, x2, 0));
      bool lhs = aug(k.db_ss(s0, t0)) != (um != u_at.end() && aug(k.d_us(um->second, t0)));
      if (lhs != up(x, x2))
        out.push_back("<d " + m.twisted.points[x2].label + ", " + m.twisted.points[x].label +
                      "> does not match the boundary and boundary-obstructed counts");
    }
  }
  return out;
}

}  // namespace detail

inline GMap map_G(const EquivariantDataset& e, std::optional<int> window = std::nullopt) {
  EquivariantModel m = validate_equivariant(e);
  if (!e.equivariant_regular) throw EquivariantError("map_G needs a dataset marked equivariant-regular");
  if (!m.has_upstairs) throw EquivariantError("map_G needs the non-equivariant complex upstairs");
  GMap g;
  g.window = std::max(window.value_or(default_window(m)), std::max(m.reach, 1));
  for (std::size_t x = 0; x < m.point_count(); ++x)
    g.window = std::max(g.window, std::abs(m.offset(x)) + 1);
  KMDataset k = equivariant_km(m, -g.window, g.window);
  g.violations = detail::coincidence_violations(m, k);
  if (!g.violations.empty()) {
    std::string msg = "count coincidences violated (G would not be a chain map):";
    for (const auto& v : g.violations) msg += "\n  " + v;
    throw EquivariantError(msg);
  }
  KMTriple t = assemble(k);
  g.check = a_f2(t.check);
  g.g0 = detail::g0_matrix(m, t.check.labels());
  std::size_t n = m.up_labels.size();
  F2Matrix one_plus_iota = F2Matrix::identity(n) + m.up_iota;
  F2Matrix lhs = g.g0 * m.up_d + g.check.T * g.g0 * one_plus_iota;
  F2Matrix rhs = g.check.c.d() * g.g0;
  g.chain_map = lhs == rhs;
  return g;
}

// ---------------------------------------------------------------------------
// Truncations: the cone of t^n on Č. A window of Č sees spurious classes at
// its top edge; the true classes are the image of a larger window.

namespace detail {

// Cone of t^n: generators (a, b), d(a, b) = (d a, T^n a + d b), T acting diagonally.
inline TComplex power_cone(const TComplex& c, int n) {
  std::size_t m = c.c.size();
  F2Matrix d = block2(c.c.d(), F2Matrix(m, m), matrix_power(c.T, n), c.c.d());
  std::vector<std::string> labels;
  for (const auto& l : c.c.labels()) labels.push_back("a:" + l);
  for (const auto& l : c.c.labels()) labels.push_back("b:" + l);
  return TComplex(F2Complex(std::move(labels), std::move(d)), direct_sum(c.T, c.T));
}

inline F2Matrix double_map(const F2Matrix& f) { return direct_sum(f, f); }

// Projection from the generators of `big` onto those of `small`, by label.
inline F2Matrix projection(const std::vector<std::string>& big, const std::vector<std::string>& small) {
  auto at = label_index(big);
  F2Matrix p(small.size(), big.size());
  for (std::size_t i = 0; i < small.size(); ++i) {
    auto it = at.find(small[i]);
    if (it == at.end()) throw EquivariantError("window projection lost generator '" + small[i] + "'");
    p(i, it->second) = Gf2(true);
  }
  return p;
}

}  // namespace detail

// The image of H(big) -> H(small), with T acting on it.
struct StableImage {
  F2Homology small;
  std::vector<BitVec> basis;  // homology coordinates in `small`
  F2Span span;
  F2Matrix t_action;          // T on the basis

  std::size_t dim() const { return basis.size(); }
  ModuleReport<F2Poly> module() const {
    std::size_t n = dim();
    PolyMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        F2Poly x = t_action(i, j).v ? F2Poly::one() : F2Poly();
        if (i == j) x += F2Poly::monomial(1);
        m(i, j) = x;
      }
    return report_from_factors<F2Poly>(0, invariant_factors(m));
  }
  // Coordinates in `basis` of a homology class of `small` lying in the image.
  std::optional<BitVec> coordinates(const BitVec& cls) const {
    auto c = span.coordinates(cls);
    if (!c) return std::nullopt;
    BitVec out(basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k)
      if ((*c)[k]) out.set(k, true);
    return out;
  }
};

inline StableImage stable_image(const TComplex& big, const TComplex& small, const F2Matrix& proj) {
  StableImage s;
  s.small = F2Homology(small.c.d());
  s.span = F2Span(s.small.dim());
  F2Homology hb(big.c.d());
  for (const auto& z : hb.representatives()) {
    BitVec cls = s.small.coordinates(apply_f2(proj, z));
    if (s.span.contains(cls)) continue;  // generator ids of the span stay basis indices
    s.span.insert(cls);
    s.basis.push_back(cls);
  }
  F2Matrix th = induced_map(s.small, s.small, small.T);
  s.t_action = F2Matrix(s.dim(), s.dim());
  for (std::size_t k = 0; k < s.dim(); ++k) {
    BitVec img(s.small.dim());
    for (std::size_t i = 0; i < s.small.dim(); ++i)
      for (std::size_t j = 0; j < s.small.dim(); ++j)
        if (th(i, j).v && s.basis[k].get(j)) img.set(i, !img.get(i));
    auto c = s.coordinates(img);
    if (!c) throw EquivariantError("T does not preserve the stable image");
    for (std::size_t i = 0; i < s.dim(); ++i)
      if (c->get(i)) s.t_action(i, k) = Gf2(true);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Localization. A window of weights [lo, hi] is a quotient of [lo, hi + m]
// and a subcomplex of [lo - m, hi]; the image of H([lo, hi + m]) in
// H([lo - m, hi]) drops the classes made by cutting the edges.

// Largest weight change along a boundary class, plus the reach of the
// interior counts on both sides.
inline int localization_margin(const EquivariantModel& m, int window) {
  int jump = 1;
  for (const auto& c : m.twisted.classes)
    jump = std::max(jump, c.shift + m.offset(c.target) - m.offset(c.source));
  return 2 * std::max(window, m.reach) + jump + 1;
}

namespace detail {

// Sends each generator of `from` to the generator of `to` with the same label, if any.
inline F2Matrix label_map(const std::vector<std::string>& from, const std::vector<std::string>& to) {
  auto at = label_index(to);
  F2Matrix f(to.size(), from.size());
  for (std::size_t j = 0; j < from.size(); ++j) {
    auto it = at.find(from[j]);
    if (it != at.end()) f(it->second, j) = Gf2(true);
  }
  return f;
}

inline WindowReporter stable_reporter(const EquivariantModel& m, int which, int margin) {
  return [m, which, margin](int lo, int hi) {
    auto pick = [which](const KMTriple& t) {
      return a_f2(which == 0 ? t.check : which == 1 ? t.hat : t.bar);
    };
    TComplex a = pick(assemble(equivariant_km(m, lo, hi + margin)));
    TComplex b = pick(assemble(equivariant_km(m, lo - margin, hi)));
    return stable_image(a, b, label_map(a.c.labels(), b.c.labels())).module();
  };
}

}  // namespace detail


struct LocalizationResult {
  int window = 0;
  PatternReport check, hat, bar;
  std::size_t dim_check = 0, dim_bar = 0;  // F2 dimensions on the window
  F2Matrix i_star;                          // on F2 homology of the window
  std::size_t rank_i_star = 0;
  std::size_t twisted_rank = 0;             // free rank of the compressed complex

  std::size_t localized_check() const { return check.localized_rank(); }
  std::size_t localized_hat() const { return hat.localized_rank(); }
  std::size_t localized_bar() const { return bar.localized_rank(); }
  bool stable() const { return check.stable && hat.stable && bar.stable; }
  bool hat_vanishes() const { return localized_hat() == 0 && hat.all_t_torsion(); }
  bool ranks_equal() const {
    return localized_check() == localized_bar() && localized_bar() == twisted_rank;
  }
  bool holds() const { return stable() && hat_vanishes() && ranks_equal(); }
};

inline LocalizationResult localization_map(const EquivariantDataset& e,
                                           std::optional<int> window = std::nullopt) {
  EquivariantAssembly a = assemble_equivariant(e, window);
  LocalizationResult r;
  r.window = a.window;
  int margin = localization_margin(a.model, a.window);
  r.check = classify_pattern(detail::stable_reporter(a.model, 0, margin), -a.window, a.window);
  r.hat = classify_pattern(detail::stable_reporter(a.model, 1, margin), -a.window, a.window);
  r.bar = classify_pattern(detail::stable_reporter(a.model, 2, margin), -a.window, a.window);
  F2Homology hc(augment(a.triple.check.d())), hb(augment(a.triple.bar.d()));
  r.dim_check = hc.dim();
  r.dim_bar = hb.dim();
  r.i_star = induced_map(hc, hb, augment(a.triple.i_star));
  r.rank_i_star = f2_rank(r.i_star);
  r.twisted_rank = twisted_homology(build_twisted(e.boundary)).free_rank;
  return r;
}

// Č on the weight window [-big, top], as a quotient of the window [-big, big].
struct CheckWindows {
  TComplex big, small;
  F2Matrix proj;
};

inline CheckWindows check_windows(const EquivariantModel& m, int top, int big) {
  KMDataset kb = equivariant_km(m, -big, big);
  KMDataset ks = restrict_window(kb, -big, top);
  CheckWindows w;
  w.big = a_f2(assemble(kb).check);
  w.small = a_f2(assemble(ks).check);
  w.proj = detail::projection(w.big.c.labels(), w.small.c.labels());
  return w;
}

struct TruncationReport {
  int n = 0;
  int window = 0;
  std::size_t dim = 0;
  ModuleReport<F2Poly> module;
};

namespace detail {

inline TruncationReport truncation_at(const EquivariantModel& m, int n, int top) {
  int big = top + n + static_cast<int>(m.pair_count()) + 2;
  CheckWindows w = check_windows(m, top, big);
  StableImage s = stable_image(power_cone(w.big, n), power_cone(w.small, n), double_map(w.proj));
  return {n, top, s.dim(), s.module()};
}

inline int truncation_base(const EquivariantModel& m, int n) {
  int top = std::max(default_window(m), 1) + n + 1;
  for (std::size_t x = 0; x < m.point_count(); ++x) top = std::max(top, std::abs(m.offset(x)) + n + 1);
  return top;
}

}  // namespace detail

// Homology of Č (x)^L F2[t]/(t^n). The top edge grows until two consecutive
// windows agree.
inline TruncationReport ss_truncate(const EquivariantDataset& e, int n) {
  if (n < 1) throw EquivariantError("truncation must be at least 1");
  EquivariantModel m = validate_equivariant(e);
  int top = detail::truncation_base(m, n);
  TruncationReport prev = detail::truncation_at(m, n, top);
  for (int step = 0; step < 8; ++step) {
    top += n + 1;
    TruncationReport next = detail::truncation_at(m, n, top);
    if (next.dim == prev.dim && next.module == prev.module) return prev;
    prev = next;
  }
  throw EquivariantError("truncation did not stabilize as the window grew");
}

// The quotient cone(t^(n+1)) -> cone(t^n), (a, b) -> (T a, b), on stable images.
struct TowerStep {
  int n = 0;
  std::size_t dim_upper = 0, dim_lower = 0;  // levels n + 1 and n
  std::size_t rank = 0;
  bool chain_map = false;
  bool compatible = false;  // stable images map into stable images
};

inline std::vector<TowerStep> truncation_tower(const EquivariantDataset& e, int up_to) {
  if (up_to < 1) throw EquivariantError("truncation must be at least 1");
  EquivariantModel m = validate_equivariant(e);
  int top = detail::truncation_base(m, up_to + 1);
  int big = top + up_to + 1 + static_cast<int>(m.pair_count()) + 2;
  CheckWindows w = check_windows(m, top, big);
  std::vector<TowerStep> out;
  for (int n = 1; n <= up_to; ++n) {
    TowerStep st;
    st.n = n;
    TComplex cu = detail::power_cone(w.small, n + 1), cl = detail::power_cone(w.small, n);
    StableImage su = stable_image(detail::power_cone(w.big, n + 1), cu, detail::double_map(w.proj));
    StableImage sl = stable_image(detail::power_cone(w.big, n), cl, detail::double_map(w.proj));
    std::size_t k = w.small.c.size();
    F2Matrix q = direct_sum(w.small.T, F2Matrix::identity(k));
    st.chain_map = q * cu.c.d() == cl.c.d() * q && q * cu.T == cl.T * q;
    st.dim_upper = su.dim();
    st.dim_lower = sl.dim();
    st.compatible = st.chain_map;
    std::vector<BitVec> cols;
    if (st.chain_map)
      for (std::size_t b = 0; b < su.dim(); ++b) {
        BitVec rep(cu.c.size());
        for (std::size_t j = 0; j < su.small.dim(); ++j)
          if (su.basis[b].get(j)) rep += su.small.representatives()[j];
        auto c = sl.coordinates(sl.small.coordinates(apply_f2(q, rep)));
        if (!c) {
          st.compatible = false;
          break;
        }
        cols.push_back(*c);
      }
    if (st.compatible) st.rank = f2_rank(matrix_from_columns(cols, sl.dim()));
    out.push_back(st);
  }
  return out;
}

// G on truncations: cone(t^n) on the Borel model of the upstairs complex
// against cone(t^n) on Č, both on stable images.
struct GTruncation {
  int n = 0;
  bool chain_map = false;
  std::size_t borel_dim = 0;  // H(Borel mod t^n), computed directly
  std::size_t source_dim = 0, target_dim = 0;
  std::size_t rank = 0;
  bool isomorphism() const {
    return chain_map && rank == source_dim && rank == target_dim && borel_dim == source_dim;
  }
};

namespace detail {

// Borel model of the upstairs complex, t-powers 0..top: d(t^k b) = t^k d b + t^(k+1) (b + iota b).
inline TComplex borel_window(const EquivariantModel& m, int top) {
  std::size_t n = m.up_labels.size(), K = static_cast<std::size_t>(top) + 1;
  F2Matrix d(n * K, n * K), t(n * K, n * K);
  F2Matrix norm = F2Matrix::identity(n) + m.up_iota;
  for (std::size_t k = 0; k < K; ++k) {
    d.place(k * n, k * n, m.up_d);
    if (k + 1 < K) {
      d.place((k + 1) * n, k * n, norm);
      t.place((k + 1) * n, k * n, F2Matrix::identity(n));
    }
  }
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < K; ++k)
    for (const auto& l : m.up_labels) labels.push_back("t^" + std::to_string(k) + "." + l);
  return TComplex(F2Complex(std::move(labels), std::move(d)), std::move(t));
}

inline F2Matrix borel_projection(std::size_t n, int big, int small) {
  F2Matrix p(n * static_cast<std::size_t>(small + 1), n * static_cast<std::size_t>(big + 1));
  for (std::size_t i = 0; i < p.rows(); ++i) p(i, i) = Gf2(true);
  return p;
}

}  // namespace detail

inline GTruncation g_truncation(const EquivariantDataset& e, int n) {
  if (n < 1) throw EquivariantError("truncation must be at least 1");
  GMap gm = map_G(e);
  EquivariantModel m = validate_equivariant(e);
  int top = std::max(detail::truncation_base(m, n), gm.window);
  int big = top + n + static_cast<int>(m.pair_count()) + 2;
  CheckWindows w = check_windows(m, top, big);
  F2Matrix g0 = detail::g0_matrix(m, w.small.c.labels());
  // Borel powers beyond the nilpotency of T on the window map to zero.
  int mt = 0;
  F2Matrix pw = w.small.T;
  while (!pw.is_zero()) {
    pw = pw * w.small.T;
    if (++mt > static_cast<int>(w.small.c.size()) + 1) throw EquivariantError("T is not nilpotent on the window");
  }
  int bt = mt + 1, bbig = bt + n + 1;
  TComplex bs = detail::borel_window(m, bt), bb = detail::borel_window(m, bbig);
  std::size_t nu = m.up_labels.size();
  F2Matrix g(w.small.c.size(), nu * static_cast<std::size_t>(bt + 1));
  F2Matrix tk = g0;
  for (int k = 0; k <= bt; ++k) {
    g.place(0, static_cast<std::size_t>(k) * nu, tk);
    tk = w.small.T * tk;
  }
  GTruncation r;
  r.n = n;
  r.chain_map = g * bs.c.d() == w.small.c.d() * g && g * bs.T == w.small.T * g;
  r.borel_dim = F2Homology(detail::borel_window(m, n - 1).c.d()).dim();  // Borel mod t^n
  StableImage src = stable_image(detail::power_cone(bb, n), detail::power_cone(bs, n),
                                 detail::double_map(detail::borel_projection(nu, bbig, bt)));
  StableImage tgt = stable_image(detail::power_cone(w.big, n), detail::power_cone(w.small, n),
                                 detail::double_map(w.proj));
  r.source_dim = src.dim();
  r.target_dim = tgt.dim();
  if (!r.chain_map) return r;
  F2Matrix gg = detail::double_map(g);
  std::vector<BitVec> cols;
  std::size_t cone_size = 2 * bs.c.size();
  for (std::size_t b = 0; b < src.dim(); ++b) {
    BitVec rep(cone_size);
    for (std::size_t j = 0; j < src.small.dim(); ++j)
      if (src.basis[b].get(j)) rep += src.small.representatives()[j];
    auto c = tgt.coordinates(tgt.small.coordinates(apply_f2(gg, rep)));
    if (!c) {
      r.chain_map = false;
      return r;
    }
    cols.push_back(*c);
  }
  r.rank = f2_rank(matrix_from_columns(cols, tgt.dim()));
  return r;
}

// ---------------------------------------------------------------------------
// Kunneth on point factors: t^i (x) t^j -> t^(i+j+n).

inline F2Laurent kunneth_pairing(const F2Laurent& a, const F2Laurent& b, int shift) {
  return (a * b).times_monomial(shift);
}

struct KunnethPointReport {
  int shift = 0;
  F2Laurent unit_image;  // image of 1 (x) 1
  std::size_t tensor_rank = 0, point_rank = 0;
  bool isomorphism = false;
};

// The point complex is F2[t, t^-1] in one generator with d = 0; the pairing
// induces the 1x1 map t^shift from the derived tensor to the point.
inline KunnethPointReport kunneth_point_model(int shift) {
  KunnethPointReport r;
  r.shift = shift;
  LaurentComplex point({"pt"}, LaurentMatrix(1, 1));
  LaurentComplex prod = tensor(point, point);
  r.unit_image = kunneth_pairing(F2Laurent::one(), F2Laurent::one(), shift);
  r.tensor_rank = homology(prod).free_rank;
  r.point_rank = homology(point).free_rank;
  LaurentMatrix k(1, 1);
  k(0, 0) = r.unit_image;
  ChainMap<F2Laurent> kappa(prod, point, k);
  r.isomorphism = is_chain_map(kappa.source, kappa.target, kappa.f) && is_invertible(k) &&
                  r.tensor_rank == r.point_rank;
  return r;
}

// ---------------------------------------------------------------------------
// The total Steenrod square.

// A basis h, f = d e, e with d e_j = f_j and d h = d f = 0, homogeneous when
// v is graded. Columns of `basis` are the new vectors in old coordinates.
struct SplitBasis {
  F2Complex split;  // v in the new basis
  F2Matrix basis;   // old <- new
  F2Matrix inverse; // new <- old
};

namespace detail {

inline F2Matrix f2_inverse(const F2Matrix& a) {
  std::size_t n = a.rows();
  F2Matrix out(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    BitVec e(n);
    e.set(j, true);
    auto x = f2_solve(a, e);
    if (!x) throw EquivariantError("split basis change is singular");
    for (std::size_t i = 0; i < n; ++i)
      if (x->get(i)) out(i, j) = Gf2(true);
  }
  return out;
}

}  // namespace detail

inline SplitBasis split_basis(const F2Complex& v) {
  std::size_t n = v.size();
  std::vector<int> deg(n, 0);
  if (v.graded()) deg = v.grading();
  std::set<int> degrees(deg.begin(), deg.end());
  // Per degree: cycles Z, a complement W of Z.
  std::map<int, std::vector<BitVec>> w_of;
  std::vector<BitVec> hs, fs, es;
  std::vector<int> hdeg, fdeg, edeg;
  for (int k : degrees) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (deg[i] == k) idx.push_back(i);
    F2Matrix dk(n, idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c)
      for (std::size_t r = 0; r < n; ++r) dk(r, c) = v.d()(r, idx[c]);
    F2Span z(n);
    for (const auto& kv : f2_kernel_basis(dk)) {
      BitVec full(n);
      for (std::size_t c = 0; c < idx.size(); ++c)
        if (kv.get(c)) full.set(idx[c], true);
      z.insert(full);
    }
    F2Span all = z;
    for (std::size_t i : idx) {
      BitVec unit(n);
      unit.set(i, true);
      if (all.insert(unit)) w_of[k].push_back(unit);
    }
  }
  for (int k : degrees) {
    int src = v.graded() ? k - 1 : k;
    F2Span zk(n);
    std::vector<BitVec> fk;
    if (w_of.count(src))
      for (const auto& wv : w_of[src]) {
        BitVec f = apply_f2(v.d(), wv);
        fk.push_back(f);
        zk.insert(f);
      }
    // f vectors are placed with their degree; e vectors with theirs.
    for (std::size_t j = 0; j < fk.size(); ++j) {
      fs.push_back(fk[j]);
      fdeg.push_back(v.graded() ? k : 1);
      es.push_back(w_of[src][j]);
      edeg.push_back(v.graded() ? src : 0);
    }
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (deg[i] == k) idx.push_back(i);
    F2Matrix dk(n, idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c)
      for (std::size_t r = 0; r < n; ++r) dk(r, c) = v.d()(r, idx[c]);
    for (const auto& kv : f2_kernel_basis(dk)) {
      BitVec full(n);
      for (std::size_t c = 0; c < idx.size(); ++c)
        if (kv.get(c)) full.set(idx[c], true);
      if (zk.insert(full)) {
        hs.push_back(full);
        hdeg.push_back(v.graded() ? k : 0);
      }
    }
  }
  std::vector<BitVec> cols;
  std::vector<std::string> labels;
  std::vector<int> grading;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    cols.push_back(hs[i]);
    labels.push_back("h" + std::to_string(i + 1));
    grading.push_back(hdeg[i]);
  }
  for (std::size_t i = 0; i < fs.size(); ++i) {
    cols.push_back(fs[i]);
    labels.push_back("f" + std::to_string(i + 1));
    grading.push_back(fdeg[i]);
  }
  for (std::size_t i = 0; i < es.size(); ++i) {
    cols.push_back(es[i]);
    labels.push_back("e" + std::to_string(i + 1));
    grading.push_back(edeg[i]);
  }
  SplitBasis s;
  s.basis = matrix_from_columns(cols, n);
  s.inverse = detail::f2_inverse(s.basis);
  F2Matrix d(n, n);
  std::size_t nh = hs.size(), nf = fs.size();
  for (std::size_t j = 0; j < nf; ++j) d(nh + j, nh + nf + j) = Gf2(true);
  if (!(s.basis * d == v.d() * s.basis)) throw EquivariantError("split basis does not split d");
  // Ungraded v keeps its levels (h: 0, f: 1, e: 0) as a grading of the split form.
  s.split = F2Complex(std::move(labels), std::move(d), std::move(grading));
  return s;
}

namespace detail {

inline std::string product_label(const std::string& a, const std::string& b) { return a + "*" + b; }

}  // namespace detail

// The diagonal model of v (x) v in a split basis of v: invariant points v (x) v,
// pairs {a (x) b, b (x) a} with a before b, and the counts forced by the
// product differential.
inline EquivariantDataset diagonal_model(const F2Complex& split) {
  std::size_t n = split.size();
  const auto& L = split.labels();
  const auto& deg = split.grading();
  EquivariantDataset e;
  e.equivariant_regular = true;
  for (std::size_t v = 0; v < n; ++v)
    e.boundary.points.push_back({L[v], deg[v], std::nullopt, deg[v]});
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (split.d()(i, j).v)
        e.boundary.classes.push_back(
            {"d:" + L[j] + ">" + L[i], L[j], L[i], deg[i] - deg[j], true, false, std::nullopt, std::nullopt});
  auto pair_name = [&](std::size_t a, std::size_t b) {
    return a < b ? detail::product_label(L[a], L[b]) : detail::product_label(L[b], L[a]);
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      e.pairs.push_back({detail::product_label(L[a], L[b]), std::nullopt, deg[a] + deg[b]});
  std::vector<UpstairsEntry> up;
  // D(a (x) b) = da (x) b + a (x) db, on ordered tensors.
  auto image = [&](std::size_t a, std::size_t b) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t r = 0; r < n; ++r) {
      if (split.d()(r, a).v) out.push_back({r, b});
      if (split.d()(r, b).v) out.push_back({a, r});
    }
    return out;
  };
  auto up_name = [&](std::size_t a, std::size_t b) {
    if (a == b) return L[a];
    return a < b ? pair_name(a, b) : "i." + pair_name(a, b);
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (auto [p, q] : image(a, b)) up.push_back({up_name(a, b), up_name(p, q)});
  e.upstairs = up;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (auto [p, q] : image(a, b)) {
        if (p == q) {
          e.interior.push_back({InteriorKind::uo, pair_name(a, b), L[p], 1, GroupRingElem::one(),
                                std::nullopt, std::nullopt});
        } else {
          GroupRingElem c = p < q ? GroupRingElem::one() : GroupRingElem::iota();
          e.interior.push_back({InteriorKind::oo, pair_name(a, b), pair_name(p, q), 1, c,
                                std::nullopt, std::nullopt});
        }
      }
  for (std::size_t v = 0; v < n; ++v)
    for (auto [p, q] : image(v, v))
      if (p < q)
        e.interior.push_back({InteriorKind::os, L[v], pair_name(p, q), 1, GroupRingElem::one(),
                              std::nullopt, std::nullopt});
  return e;
}

struct SteenrodReport {
  std::size_t homology_dim = 0;            // dim H(v)
  std::size_t twisted_rank = 0;            // free rank of the model's twisted homology
  std::vector<std::vector<F2Laurent>> sq;  // Sq of each homology basis class, x_v -> t^(deg v) v
  bool cycles = false;                     // each St(x) is a cycle of the compressed complex
  bool isomorphism = false;                // Sq (x) F2[t, t^-1] onto the twisted homology
  bool graded = false;
  bool degree_doubles = false;             // every term of St(x) has degree 2 deg x
  // sq_components[k][i] = Sq^i of class k, in the homology basis of v.
  std::vector<std::map<int, BitVec>> sq_components;
  bool only_sq0 = false;                   // Sq^0 = id and Sq^i = 0 for i > 0
  std::optional<int> degeneration_page;    // of the twisted action spectral sequence
  bool degenerates_at_e2() const { return degeneration_page && *degeneration_page <= 2; }
  bool holds() const {
    return cycles && isomorphism && (!graded || degree_doubles) && degenerates_at_e2();
  }
};

// St(x) = i*(G(x (x) x)) for a homology basis of v. Without a product model
// the diagonal model of a split basis is used; a supplied model must follow
// the naming of diagonal_model in the basis of v.
inline SteenrodReport steenrod_square(const F2Complex& v,
                                      const std::optional<EquivariantDataset>& product_model = std::nullopt) {
  SteenrodReport r;
  r.graded = v.graded();
  F2Complex base = v;
  EquivariantDataset e;
  if (product_model) {
    e = *product_model;
  } else {
    base = split_basis(v).split;
    e = diagonal_model(base);
  }
  std::size_t n = base.size();
  std::vector<int> deg(n, 0);
  if (base.graded()) deg = base.grading();
  EquivariantModel m = validate_equivariant(e);
  TwistedComplex tc = build_twisted(e.boundary);
  std::size_t np = m.point_count();
  std::map<std::string, std::size_t> point_at;
  for (std::size_t x = 0; x < np; ++x) point_at[m.twisted.points[x].label] = x;
  std::vector<std::size_t> point_of(n);
  for (std::size_t a = 0; a < n; ++a) {
    auto it = point_at.find(base.labels()[a]);
    if (it == point_at.end())
      throw EquivariantError("product model has no invariant point for '" + base.labels()[a] + "'");
    point_of[a] = it->second;
  }

  // i* at the smallest window holding the interior counts and the ladder bases.
  int w = std::max({m.reach, 1, default_window(m)});
  for (std::size_t x = 0; x < np; ++x) w = std::max(w, std::abs(m.offset(x)) + 1);
  KMTriple t = assemble(equivariant_km(m, -w, w));
  auto c_at = detail::label_index(t.check.labels());
  std::map<std::string, std::pair<std::size_t, int>> bar_gen;
  for (const auto& g : twisted_window(m.twisted, -w, w).generators)
    bar_gen[detail::ladder_name(m.twisted, g.point, g.i)] = {g.point, g.i};
  F2Matrix istar = augment(t.i_star);

  F2Homology hv(base.d());
  r.homology_dim = hv.dim();
  r.twisted_rank = twisted_homology(tc).free_rank;
  r.cycles = true;
  r.degree_doubles = true;
  const LaurentMatrix& D = tc.compressed.d();
  std::vector<std::vector<F2Laurent>> raw;  // St(x) in the compressed basis
  std::vector<int> class_degree;
  for (const auto& z : hv.representatives()) {
    std::vector<std::size_t> sup;
    for (std::size_t a = 0; a < n; ++a)
      if (z.get(a)) sup.push_back(a);
    int dx = deg[sup.front()];
    class_degree.push_back(dx);
    // x (x) x = sum_a a (x) a + sum_{a < b} (a (x) b + b (x) a); G keeps the distinguished term.
    BitVec chain(t.check.size());
    auto flip = [&](const std::string& l) {
      auto it = c_at.find(l);
      if (it == c_at.end()) throw EquivariantError("product model has no generator '" + l + "'");
      chain.set(it->second, !chain.get(it->second));
    };
    for (std::size_t a : sup) flip(detail::ladder_name(m.twisted, point_of[a], 0));
    for (std::size_t i = 0; i < sup.size(); ++i)
      for (std::size_t j = i + 1; j < sup.size(); ++j)
        flip(detail::product_label(base.labels()[sup[i]], base.labels()[sup[j]]));
    BitVec st = apply_f2(istar, chain);
    std::vector<F2Laurent> vec(np);
    for (std::size_t g = 0; g < st.size(); ++g) {
      if (!st.get(g)) continue;
      auto [x, i] = bar_gen.at(t.bar.labels()[g]);
      vec[x] += F2Laurent::monomial(i);
      if (r.graded && m.twisted.graded && m.weight(x, i) != 2 * dx) r.degree_doubles = false;
    }
    for (const auto& c : D.apply(vec))
      if (!c.is_zero()) r.cycles = false;
    raw.push_back(vec);
  }
  if (r.graded && !m.twisted.graded) r.degree_doubles = false;

  // [D | St] has unit invariant factors only when St spans a complement of the boundaries.
  LaurentMatrix both(np, D.cols() + raw.size());
  both.place(0, 0, D);
  for (std::size_t c = 0; c < raw.size(); ++c)
    for (std::size_t x = 0; x < np; ++x) both(x, D.cols() + c) = raw[c][x];
  auto fb = snf_laurent(both);
  auto fd = snf_laurent(D);
  bool units = true;
  for (const auto& f : fb) units = units && f.is_unit();
  r.isomorphism = units && raw.size() == r.twisted_rank && fb.size() == fd.size() + r.twisted_rank;

  // Trivialized: x_v -> t^(deg v) v.
  for (const auto& vec : raw) {
    std::vector<F2Laurent> out(n);
    for (std::size_t a = 0; a < n; ++a) out[a] = vec[point_of[a]].times_monomial(deg[a]);
    r.sq.push_back(out);
  }
  if (r.graded) {
    // Sq(x) = sum_i t^(deg x - i) Sq^i(x).
    r.only_sq0 = true;
    for (std::size_t c = 0; c < r.sq.size(); ++c) {
      std::map<int, BitVec> comps;
      for (std::size_t a = 0; a < n; ++a) {
        const F2Laurent& coef = r.sq[c][a];
        if (coef.is_zero()) continue;
        for (int ex = coef.min_exponent(); ex <= coef.max_exponent(); ++ex) {
          if (!coef.coeff(ex)) continue;
          auto [it, fresh] = comps.try_emplace(class_degree[c] - ex, BitVec(n));
          it->second.set(a, !it->second.get(a));
        }
      }
      std::map<int, BitVec> classes;
      for (const auto& [i, vec] : comps) {
        if (!hv.is_cycle(vec)) {
          r.only_sq0 = false;
          continue;
        }
        classes[i] = hv.coordinates(vec);
      }
      BitVec unit(hv.dim());
      unit.set(c, true);
      for (const auto& [i, cls] : classes)
        if (i == 0 ? !(cls == unit) : !cls.is_zero()) r.only_sq0 = false;
      if (!classes.count(0)) r.only_sq0 = false;
      r.sq_components.push_back(classes);
    }
  }
  r.degeneration_page = twisted_spectral_pages(tc, 3).degeneration_page;
  return r;
}

}  // namespace polarfloer
