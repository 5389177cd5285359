// Dataset files. A file is one JSON document with a schema version, a kind
// tag and the tables of that kind. Count matrices are lists of
// [row label, column label, ring element] with the column the source.
// emit_dataset writes the canonical form: sorted keys, tables sorted by
// label, zero entries dropped, ring elements in their normalized spelling.
#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <json.hpp>

#include "polarfloer/complexes.hpp"
#include "polarfloer/equiv_floer.hpp"
#include "polarfloer/morse_km.hpp"
#include "polarfloer/rings.hpp"
#include "polarfloer/twisted.hpp"

namespace polarfloer {

using Json = nlohmann::json;

inline constexpr int kDatasetVersion = 1;

// Malformed input: each message starts with a line/column or a field path.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(std::vector<std::string> errors)
      : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& e) {
    std::string out;
    for (std::size_t i = 0; i < e.size(); ++i) out += (i ? "\n" : "") + e[i];
    return out;
  }
  std::vector<std::string> errors_;
};

struct DatasetOptions {
  std::optional<int> window;
  std::optional<int> truncation;
  std::optional<bool> grading;

  bool empty() const { return !window && !truncation && !grading; }
  friend bool operator==(const DatasetOptions&, const DatasetOptions&) = default;
};

// Raw complex tables; d * d = 0 is checked when the complex is built.
template <class R>
struct ComplexData {
  std::vector<std::string> labels;
  std::optional<std::vector<int>> grading;
  RingMatrix<R> d;

  FreeComplex<R> complex() const { return FreeComplex<R>(labels, d, grading); }
};

using Z2ComplexData = ComplexData<GroupRingElem>;

struct FloerData : ComplexData<Gf2> {
  std::optional<EquivariantDataset> product_model;
};

struct PorteousData {
  F2Poly total_sw;
  int n = 1;
  Gf2 pairing{true};
};

struct TwistedData {
  TwistedDataset dataset;
  std::optional<PorteousData> porteous;
};

using DatasetBody = std::variant<Z2ComplexData, KMDataset, TwistedData, EquivariantDataset, FloerData>;

struct Dataset {
  DatasetOptions options;
  DatasetBody body;

  std::string kind() const {
    static const char* names[] = {"z2complex", "km", "twisted", "equivariant", "floer"};
    return names[body.index()];
  }
};

namespace io {

inline std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
inline std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

// Collects schema errors so one run reports all of them.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) {
    errors.push_back((path.empty() ? "/" : path) + ": " + msg);
  }

  bool object(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool known = false;
      for (const char* a : allowed) known = known || it.key() == a;
      if (!known) fail(child(path, it.key()), "unknown field '" + it.key() + "'");
    }
    return true;
  }

  const Json* field(const Json& obj, const std::string& path, const char* key, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(child(path, key), "missing required field");
      return nullptr;
    }
    return &*it;
  }

  std::optional<int> integer(const Json& obj, const std::string& path, const char* key, bool required) {
    const Json* v = field(obj, path, key, required);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      fail(child(path, key), "expected an integer");
      return std::nullopt;
    }
    long long x = v->get<long long>();
    if (x < -1000000 || x > 1000000) {
      fail(child(path, key), "integer out of range");
      return std::nullopt;
    }
    return static_cast<int>(x);
  }

  std::optional<bool> boolean(const Json& obj, const std::string& path, const char* key, bool required) {
    const Json* v = field(obj, path, key, required);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      fail(child(path, key), "expected true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  std::optional<std::string> string(const Json& obj, const std::string& path, const char* key, bool required) {
    const Json* v = field(obj, path, key, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(child(path, key), "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<std::string> label(const Json& obj, const std::string& path, const char* key) {
    auto s = string(obj, path, key, true);
    if (s && s->empty()) {
      fail(child(path, key), "empty label");
      return std::nullopt;
    }
    return s;
  }

  // The array under key, or an empty one when the key is absent and optional.
  const Json& array(const Json& obj, const std::string& path, const char* key, bool required) {
    static const Json empty = Json::array();
    const Json* v = field(obj, path, key, required);
    if (!v) return empty;
    if (!v->is_array()) {
      fail(child(path, key), "expected a list");
      return empty;
    }
    return *v;
  }

  std::optional<Rational> rational(const Json& obj, const std::string& path, const char* key) {
    const Json* v = field(obj, path, key, false);
    if (!v) return std::nullopt;
    if (v->is_number_integer()) return Rational(v->get<long long>());
    if (v->is_string()) {
      const std::string s = v->get<std::string>();
      auto slash = s.find('/');
      try {
        std::size_t used = 0;
        long long num = std::stoll(s.substr(0, slash), &used);
        if (used != s.substr(0, slash).size()) throw std::invalid_argument(s);
        long long den = 1;
        if (slash != std::string::npos) {
          std::string rest = s.substr(slash + 1);
          den = std::stoll(rest, &used);
          if (used != rest.size()) throw std::invalid_argument(s);
        }
        if (den == 0) throw std::invalid_argument(s);
        return Rational(num, den);
      } catch (const std::exception&) {
      }
    }
    fail(child(path, key), "expected an integer or a fraction string like \"3/2\"");
    return std::nullopt;
  }

  template <class Parse>
  auto ring(const std::string& text, const std::string& path, Parse parse)
      -> std::optional<decltype(parse(text))> {
    try {
      return parse(text);
    } catch (const std::exception& e) {
      fail(path, e.what());
      return std::nullopt;
    }
  }
};

using LabelIndex = std::map<std::string, std::size_t>;

inline LabelIndex index_labels(Reader& r, const std::vector<std::string>& labels,
                               const std::vector<std::string>& paths, std::set<std::string>& taken) {
  LabelIndex at;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!taken.insert(labels[i]).second) r.fail(paths[i], "duplicate label '" + labels[i] + "'");
    at.emplace(labels[i], i);
  }
  return at;
}

// Entries [row, col, coefficient] into m; rows and cols name the label sets.
template <class R, class Parse>
void read_entries(Reader& r, const Json& list, const std::string& path, const LabelIndex& rows,
                  const char* row_kind, const LabelIndex& cols, const char* col_kind, RingMatrix<R>& m,
                  Parse parse) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const Json& e = list[k];
    std::string p = child(path, k);
    if (!e.is_array() || e.size() != 3 || !e[0].is_string() || !e[1].is_string() || !e[2].is_string()) {
      r.fail(p, "expected [row label, column label, coefficient]");
      continue;
    }
    auto row = e[0].get<std::string>(), col = e[1].get<std::string>();
    auto ri = rows.find(row), ci = cols.find(col);
    if (ri == rows.end()) r.fail(child(p, 0), std::string("unknown ") + row_kind + " label '" + row + "'");
    if (ci == cols.end()) r.fail(child(p, 1), std::string("unknown ") + col_kind + " label '" + col + "'");
    auto c = r.ring(e[2].get<std::string>(), child(p, 2), parse);
    if (ri == rows.end() || ci == cols.end() || !c) continue;
    if (!seen.insert({ri->second, ci->second}).second) {
      r.fail(p, "duplicate entry for (" + row + ", " + col + ")");
      continue;
    }
    m(ri->second, ci->second) = *c;
  }
}

template <class R>
Json entries_json(const RingMatrix<R>& m, const std::vector<std::string>& rows,
                  const std::vector<std::string>& cols) {
  std::vector<std::tuple<std::string, std::string, std::string>> out;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!RingTraits<R>::is_zero(m(i, j))) out.emplace_back(rows[i], cols[j], RingTraits<R>::format(m(i, j)));
  std::sort(out.begin(), out.end());
  Json a = Json::array();
  for (const auto& [x, y, c] : out) a.push_back(Json::array({x, y, c}));
  return a;
}

inline Json rational_json(const Rational& q) {
  if (q.denominator() == 1) return q.numerator();
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

template <class T, class Key>
Json sorted_json(std::vector<T> items, Key key, std::function<Json(const T&)> to_json) {
  std::sort(items.begin(), items.end(), [&](const T& a, const T& b) { return key(a) < key(b); });
  Json a = Json::array();
  for (const auto& x : items) a.push_back(to_json(x));
  return a;
}

// ---------------------------------------------------------------------------
// Complexes.

template <class R, class Parse>
ComplexData<R> read_complex(Reader& r, const Json& j, const std::string& path, Parse parse) {
  ComplexData<R> c;
  const Json& gens = r.array(j, path, "generators", true);
  std::vector<std::string> paths;
  std::vector<int> degrees;
  std::size_t with_degree = 0;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    std::string p = child(child(path, "generators"), i);
    if (!r.object(gens[i], p, {"label", "degree"})) continue;
    auto l = r.label(gens[i], p, "label");
    auto d = r.integer(gens[i], p, "degree", false);
    c.labels.push_back(l.value_or(""));
    paths.push_back(p);
    degrees.push_back(d.value_or(0));
    if (d) ++with_degree;
  }
  if (with_degree == c.labels.size() && !c.labels.empty()) c.grading = degrees;
  else if (with_degree != 0) r.fail(child(path, "generators"), "either every generator has a degree or none has");
  std::set<std::string> taken;
  LabelIndex at = index_labels(r, c.labels, paths, taken);
  c.d = RingMatrix<R>(c.labels.size(), c.labels.size());
  read_entries(r, r.array(j, path, "differential", false), child(path, "differential"), at, "generator", at,
               "generator", c.d, parse);
  return c;
}

template <class R>
void write_complex(Json& j, const ComplexData<R>& c) {
  std::vector<std::size_t> order(c.labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return c.labels[a] < c.labels[b]; });
  Json gens = Json::array();
  for (auto i : order) {
    Json g = {{"label", c.labels[i]}};
    if (c.grading) g["degree"] = (*c.grading)[i];
    gens.push_back(g);
  }
  j["generators"] = gens;
  j["differential"] = entries_json(c.d, c.labels, c.labels);
}

// ---------------------------------------------------------------------------
// Morse-KM.

inline const char* const kKMMatrices[] = {"d_oo", "d_os", "d_uo", "d_us", "db_ss", "db_su", "db_us", "db_uu"};

inline Z2Matrix& km_matrix(KMDataset& k, std::size_t i) {
  Z2Matrix* ms[] = {&k.d_oo, &k.d_os, &k.d_uo, &k.d_us, &k.db_ss, &k.db_su, &k.db_us, &k.db_uu};
  return *ms[i];
}

// Row and column parts of each count matrix.
inline std::pair<char, char> km_shape(std::size_t i) {
  static const std::pair<char, char> s[] = {{'o', 'o'}, {'o', 's'}, {'u', 'o'}, {'u', 's'},
                                            {'s', 's'}, {'s', 'u'}, {'u', 's'}, {'u', 'u'}};
  return s[i];
}

inline KMDataset read_km(Reader& r, const Json& j, const std::string& path) {
  KMDataset k;
  k.lifted = r.boolean(j, path, "lifted", false).value_or(false);
  std::set<std::string> taken;
  std::map<char, LabelIndex> parts;
  for (char part : {'o', 's', 'u'}) {
    std::string key(1, part);
    auto& gens = part == 'o' ? k.o : part == 's' ? k.s : k.u;
    const Json& list = r.array(j, path, key.c_str(), false);
    std::vector<std::string> labels, paths;
    for (std::size_t i = 0; i < list.size(); ++i) {
      std::string p = child(child(path, key), i);
      if (!r.object(list[i], p, {"label", "degree", "point", "level"})) continue;
      KMGenerator g;
      g.label = r.label(list[i], p, "label").value_or("");
      g.grading = r.integer(list[i], p, "degree", false);
      g.point = r.string(list[i], p, "point", false);
      g.level = r.integer(list[i], p, "level", false);
      gens.push_back(g);
      labels.push_back(g.label);
      paths.push_back(p);
    }
    parts[part] = index_labels(r, labels, paths, taken);
  }
  k.reset_matrices();
  const Json* counts = r.field(j, path, "counts", false);
  if (!counts) return k;
  std::string cp = child(path, "counts");
  if (!r.object(*counts, cp, {"d_oo", "d_os", "d_uo", "d_us", "db_ss", "db_su", "db_us", "db_uu"})) return k;
  auto parse = [lifted = k.lifted](std::string_view s) {
    if (lifted) return parse_group_ring(s);
    return GroupRingElem(parse_gf2(s).v, false);
  };
  static const std::map<char, std::string> part_name = {{'o', "o"}, {'s', "s"}, {'u', "u"}};
  for (std::size_t i = 0; i < 8; ++i) {
    auto [rp, cpart] = km_shape(i);
    read_entries(r, r.array(*counts, cp, kKMMatrices[i], false), child(cp, kKMMatrices[i]), parts[rp],
                 part_name.at(rp).c_str(), parts[cpart], part_name.at(cpart).c_str(), km_matrix(k, i), parse);
  }
  return k;
}

inline Json km_generators_json(const std::vector<KMGenerator>& gens) {
  return sorted_json<KMGenerator>(
      gens, [](const KMGenerator& g) { return g.label; },
      [](const KMGenerator& g) {
        Json o = {{"label", g.label}};
        if (g.grading) o["degree"] = *g.grading;
        if (g.point) o["point"] = *g.point;
        if (g.level) o["level"] = *g.level;
        return o;
      });
}

inline void write_km(Json& j, const KMDataset& k) {
  j["lifted"] = k.lifted;
  j["o"] = km_generators_json(k.o);
  j["s"] = km_generators_json(k.s);
  j["u"] = km_generators_json(k.u);
  auto labels = [&](char p) { return detail::part_labels(p == 'o' ? k.o : p == 's' ? k.s : k.u); };
  Json counts = Json::object();
  KMDataset copy = k;
  for (std::size_t i = 0; i < 8; ++i) {
    auto [rp, cp] = km_shape(i);
    counts[kKMMatrices[i]] = entries_json(km_matrix(copy, i), labels(rp), labels(cp));
  }
  j["counts"] = counts;
}

// ---------------------------------------------------------------------------
// Twisted and equivariant data.

inline TwistedDataset read_twisted_body(Reader& r, const Json& j, const std::string& path) {
  TwistedDataset tw;
  const Json& points = r.array(j, path, "points", false);
  std::vector<std::string> labels, paths;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::string p = child(child(path, "points"), i);
    if (!r.object(points[i], p, {"label", "index", "action", "s"})) continue;
    TwistedPoint pt;
    pt.label = r.label(points[i], p, "label").value_or("");
    pt.index = r.integer(points[i], p, "index", true).value_or(0);
    pt.action = r.rational(points[i], p, "action");
    pt.s = r.integer(points[i], p, "s", false);
    tw.points.push_back(pt);
    labels.push_back(pt.label);
    paths.push_back(p);
  }
  std::set<std::string> taken;
  LabelIndex at = index_labels(r, labels, paths, taken);
  const Json& classes = r.array(j, path, "classes", false);
  std::set<std::string> class_labels;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    std::string p = child(child(path, "classes"), i);
    if (!r.object(classes[i], p, {"label", "source", "target", "sf", "pos", "neg", "shift", "at"})) continue;
    TwistedClass c;
    c.label = r.label(classes[i], p, "label").value_or("");
    c.source = r.label(classes[i], p, "source").value_or("");
    c.target = r.label(classes[i], p, "target").value_or("");
    for (auto [key, l] : {std::pair{"source", &c.source}, std::pair{"target", &c.target}})
      if (!l->empty() && !at.count(*l)) r.fail(child(p, key), "unknown point label '" + *l + "'");
    c.sf = r.integer(classes[i], p, "sf", true).value_or(0);
    c.pos = r.boolean(classes[i], p, "pos", false).value_or(false);
    c.neg = r.boolean(classes[i], p, "neg", false).value_or(false);
    c.shift = r.integer(classes[i], p, "shift", false);
    c.at = r.integer(classes[i], p, "at", false);
    tw.classes.push_back(c);
    class_labels.insert(c.label);
  }
  const Json& comps = r.array(j, path, "compositions", false);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    std::string p = child(child(path, "compositions"), i);
    if (!r.object(comps[i], p, {"first", "second", "composite"})) continue;
    TwistedComposition c;
    c.first = r.label(comps[i], p, "first").value_or("");
    c.second = r.label(comps[i], p, "second").value_or("");
    c.composite = r.label(comps[i], p, "composite").value_or("");
    for (auto [key, l] : {std::pair{"first", &c.first}, std::pair{"second", &c.second},
                          std::pair{"composite", &c.composite}})
      if (!l->empty() && !class_labels.count(*l)) r.fail(child(p, key), "unknown class label '" + *l + "'");
    tw.compositions.push_back(c);
  }
  return tw;
}

inline Json twisted_body_json(const TwistedDataset& tw) {
  Json j;
  j["points"] = sorted_json<TwistedPoint>(
      tw.points, [](const TwistedPoint& p) { return p.label; },
      [](const TwistedPoint& p) {
        Json o = {{"label", p.label}, {"index", p.index}};
        if (p.action) o["action"] = rational_json(*p.action);
        if (p.s) o["s"] = *p.s;
        return o;
      });
  j["classes"] = sorted_json<TwistedClass>(
      tw.classes,
      [](const TwistedClass& c) {
        return std::tuple(c.label, c.at, c.source, c.target, c.sf, c.pos, c.neg, c.shift);
      },
      [](const TwistedClass& c) {
        Json o = {{"label", c.label}, {"source", c.source}, {"target", c.target},
                  {"sf", c.sf},       {"pos", c.pos},       {"neg", c.neg}};
        if (c.shift) o["shift"] = *c.shift;
        if (c.at) o["at"] = *c.at;
        return o;
      });
  j["compositions"] = sorted_json<TwistedComposition>(
      tw.compositions, [](const TwistedComposition& c) { return std::tuple(c.first, c.second, c.composite); },
      [](const TwistedComposition& c) {
        return Json{{"first", c.first}, {"second", c.second}, {"composite", c.composite}};
      });
  return j;
}

inline EquivariantDataset read_equivariant_body(Reader& r, const Json& j, const std::string& path) {
  EquivariantDataset e;
  e.equivariant_regular = r.boolean(j, path, "equivariant_regular", false).value_or(false);
  if (const Json* b = r.field(j, path, "boundary", false)) {
    std::string bp = child(path, "boundary");
    if (r.object(*b, bp, {"points", "classes", "compositions"})) e.boundary = read_twisted_body(r, *b, bp);
  }
  std::set<std::string> points, pairs, upstairs;
  for (const auto& p : e.boundary.points) {
    points.insert(p.label);
    upstairs.insert(p.label);
  }
  const Json& list = r.array(j, path, "pairs", false);
  for (std::size_t i = 0; i < list.size(); ++i) {
    std::string p = child(child(path, "pairs"), i);
    if (!r.object(list[i], p, {"label", "action", "degree"})) continue;
    EquivariantPair y;
    y.label = r.label(list[i], p, "label").value_or("");
    y.action = r.rational(list[i], p, "action");
    y.degree = r.integer(list[i], p, "degree", false);
    if (!y.label.empty() &&
        (!upstairs.insert(y.label).second || !upstairs.insert("i." + y.label).second))
      r.fail(child(p, "label"), "duplicate label '" + y.label + "'");
    pairs.insert(y.label);
    e.pairs.push_back(y);
  }
  const Json& counts = r.array(j, path, "interior", false);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::string p = child(child(path, "interior"), i);
    if (!r.object(counts[i], p, {"kind", "source", "target", "mu", "coeff", "source_index", "target_index"}))
      continue;
    InteriorCount c;
    auto kind = r.string(counts[i], p, "kind", true);
    if (kind) {
      try {
        c.kind = parse_interior_kind(*kind);
      } catch (const std::exception& ex) {
        r.fail(child(p, "kind"), ex.what());
      }
    }
    c.source = r.label(counts[i], p, "source").value_or("");
    c.target = r.label(counts[i], p, "target").value_or("");
    bool src_point = c.kind == InteriorKind::os || c.kind == InteriorKind::us;
    bool tgt_point = c.kind == InteriorKind::uo || c.kind == InteriorKind::us;
    auto check = [&](const char* key, const std::string& l, bool point) {
      if (l.empty()) return;
      if (point ? !points.count(l) : !pairs.count(l))
        r.fail(child(p, key), std::string("unknown ") + (point ? "invariant point" : "pair") + " label '" + l + "'");
    };
    check("source", c.source, src_point);
    check("target", c.target, tgt_point);
    c.mu = r.integer(counts[i], p, "mu", true).value_or(1);
    if (auto s = r.string(counts[i], p, "coeff", false))
      if (auto v = r.ring(*s, child(p, "coeff"), parse_group_ring)) c.coeff = *v;
    c.source_index = r.integer(counts[i], p, "source_index", false);
    c.target_index = r.integer(counts[i], p, "target_index", false);
    e.interior.push_back(c);
  }
  if (const Json* up = r.field(j, path, "upstairs", false)) {
    std::string up_path = child(path, "upstairs");
    e.upstairs.emplace();
    if (!up->is_array()) r.fail(up_path, "expected a list");
    else
      for (std::size_t i = 0; i < up->size(); ++i) {
        const Json& u = (*up)[i];
        std::string p = child(up_path, i);
        if (!u.is_array() || u.size() != 2 || !u[0].is_string() || !u[1].is_string()) {
          r.fail(p, "expected [source label, target label]");
          continue;
        }
        UpstairsEntry entry{u[0].get<std::string>(), u[1].get<std::string>()};
        if (!upstairs.count(entry.source)) r.fail(child(p, 0), "unknown upstairs label '" + entry.source + "'");
        if (!upstairs.count(entry.target)) r.fail(child(p, 1), "unknown upstairs label '" + entry.target + "'");
        e.upstairs->push_back(entry);
      }
  }
  return e;
}

inline Json equivariant_body_json(const EquivariantDataset& e) {
  Json j;
  j["boundary"] = twisted_body_json(e.boundary);
  j["equivariant_regular"] = e.equivariant_regular;
  j["pairs"] = sorted_json<EquivariantPair>(
      e.pairs, [](const EquivariantPair& y) { return y.label; },
      [](const EquivariantPair& y) {
        Json o = {{"label", y.label}};
        if (y.action) o["action"] = rational_json(*y.action);
        if (y.degree) o["degree"] = *y.degree;
        return o;
      });
  std::vector<InteriorCount> interior;
  for (const auto& c : e.interior)
    if (!c.coeff.is_zero()) interior.push_back(c);
  j["interior"] = sorted_json<InteriorCount>(
      interior,
      [](const InteriorCount& c) {
        return std::tuple(interior_kind_name(c.kind), c.source, c.target, c.mu, c.source_index, c.target_index,
                          c.coeff.str());
      },
      [](const InteriorCount& c) {
        Json o = {{"kind", interior_kind_name(c.kind)},
                  {"source", c.source},
                  {"target", c.target},
                  {"mu", c.mu},
                  {"coeff", c.coeff.str()}};
        if (c.source_index) o["source_index"] = *c.source_index;
        if (c.target_index) o["target_index"] = *c.target_index;
        return o;
      });
  if (e.upstairs)
    j["upstairs"] = sorted_json<UpstairsEntry>(
        *e.upstairs, [](const UpstairsEntry& u) { return std::pair(u.source, u.target); },
        [](const UpstairsEntry& u) { return Json::array({u.source, u.target}); });
  return j;
}

// ---------------------------------------------------------------------------
// Documents.

inline const std::vector<const char*>& kind_fields(const std::string& kind) {
  static const std::map<std::string, std::vector<const char*>> fields = {
      {"z2complex", {"generators", "differential"}},
      {"km", {"lifted", "o", "s", "u", "counts"}},
      {"twisted", {"points", "classes", "compositions", "porteous"}},
      {"equivariant", {"pairs", "boundary", "interior", "upstairs", "equivariant_regular"}},
      {"floer", {"generators", "differential", "product_model"}}};
  return fields.at(kind);
}

inline constexpr int kDefaultDatasetWindow = 4;

inline Dataset read_document(Reader& r, const Json& j) {
  Dataset ds;
  if (!j.is_object()) {
    r.fail("", "expected a JSON object at the top level");
    return ds;
  }
  auto version = r.integer(j, "", "version", true);
  if (version && *version != kDatasetVersion)
    r.fail("/version", "unsupported format version " + std::to_string(*version) + " (expected " +
                           std::to_string(kDatasetVersion) + ")");
  auto kind = r.string(j, "", "kind", true);
  if (!kind) return ds;
  static const std::set<std::string> kinds = {"z2complex", "km", "twisted", "equivariant", "floer"};
  if (!kinds.count(*kind)) {
    r.fail("/kind", "unknown dataset kind '" + *kind + "' (expected z2complex, km, twisted, equivariant or floer)");
    return ds;
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& allowed = kind_fields(*kind);
    bool known = it.key() == "version" || it.key() == "kind" || it.key() == "options";
    for (const char* a : allowed) known = known || it.key() == a;
    if (!known) r.fail("/" + it.key(), "unknown field '" + it.key() + "' for kind " + *kind);
  }
  if (const Json* o = r.field(j, "", "options", false)) {
    if (r.object(*o, "/options", {"window", "truncation", "grading"})) {
      ds.options.window = r.integer(*o, "/options", "window", false);
      ds.options.truncation = r.integer(*o, "/options", "truncation", false);
      ds.options.grading = r.boolean(*o, "/options", "grading", false);
      if (ds.options.window && *ds.options.window < 0) r.fail("/options/window", "must be non-negative");
      if (ds.options.truncation && *ds.options.truncation < 1) r.fail("/options/truncation", "must be at least 1");
    }
  }
  int window = ds.options.window.value_or(kDefaultDatasetWindow);
  if (*kind == "z2complex") {
    ds.body = read_complex<GroupRingElem>(r, j, "", parse_group_ring);
  } else if (*kind == "km") {
    ds.body = read_km(r, j, "");
  } else if (*kind == "twisted") {
    TwistedData t;
    t.dataset = read_twisted_body(r, j, "");
    t.dataset.window = window;
    if (const Json* p = r.field(j, "", "porteous", false)) {
      if (r.object(*p, "/porteous", {"total_sw", "n", "pairing"})) {
        PorteousData pd;
        if (auto s = r.string(*p, "/porteous", "total_sw", true))
          if (auto v = r.ring(*s, "/porteous/total_sw", parse_poly)) pd.total_sw = *v;
        pd.n = r.integer(*p, "/porteous", "n", true).value_or(1);
        if (auto s = r.string(*p, "/porteous", "pairing", false))
          if (auto v = r.ring(*s, "/porteous/pairing", parse_gf2)) pd.pairing = *v;
        t.porteous = pd;
      }
    }
    ds.body = t;
  } else if (*kind == "equivariant") {
    EquivariantDataset e = read_equivariant_body(r, j, "");
    e.window = window;
    e.boundary.window = window;
    ds.body = e;
  } else {
    FloerData f;
    static_cast<ComplexData<Gf2>&>(f) = read_complex<Gf2>(r, j, "", parse_gf2);
    if (const Json* pm = r.field(j, "", "product_model", false)) {
      if (r.object(*pm, "/product_model",
                   {"pairs", "boundary", "interior", "upstairs", "equivariant_regular", "window"})) {
        f.product_model = read_equivariant_body(r, *pm, "/product_model");
        int w = r.integer(*pm, "/product_model", "window", false).value_or(kDefaultDatasetWindow);
        f.product_model->window = w;
        f.product_model->boundary.window = w;
      }
    }
    ds.body = f;
  }
  return ds;
}

}  // namespace io

// Parses a document; throws SchemaError listing every problem found.
inline Dataset parse_dataset_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // "[json.exception.parse_error.101] parse error at line 2, column 1: ..."
    std::string what = e.what();
    auto at = what.find("at line");
    throw SchemaError({at == std::string::npos ? what : what.substr(at + 3)});
  }
  io::Reader r;
  Dataset ds = io::read_document(r, j);
  if (!r.errors.empty()) throw SchemaError(r.errors);
  return ds;
}

inline Dataset parse_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError({path + ": cannot open file"});
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_dataset_text(buf.str());
  } catch (const SchemaError& e) {
    std::vector<std::string> errs;
    for (const auto& m : e.errors()) errs.push_back(path + ": " + m);
    throw SchemaError(errs);
  }
}

inline Json dataset_json(const Dataset& ds) {
  Json j;
  j["version"] = kDatasetVersion;
  j["kind"] = ds.kind();
  DatasetOptions opts = ds.options;
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, Z2ComplexData>) {
          io::write_complex(j, body);
        } else if constexpr (std::is_same_v<T, KMDataset>) {
          io::write_km(j, body);
        } else if constexpr (std::is_same_v<T, TwistedData>) {
          j.update(io::twisted_body_json(body.dataset));
          if (body.dataset.window != io::kDefaultDatasetWindow) opts.window = body.dataset.window;
          if (body.porteous)
            j["porteous"] = {{"total_sw", body.porteous->total_sw.str()},
                             {"n", body.porteous->n},
                             {"pairing", body.porteous->pairing.v ? "1" : "0"}};
        } else if constexpr (std::is_same_v<T, EquivariantDataset>) {
          j.update(io::equivariant_body_json(body));
          if (body.window != io::kDefaultDatasetWindow) opts.window = body.window;
        } else {
          io::write_complex(j, body);
          if (body.product_model) {
            Json pm = io::equivariant_body_json(*body.product_model);
            if (body.product_model->window != io::kDefaultDatasetWindow) pm["window"] = body.product_model->window;
            j["product_model"] = pm;
          }
        }
      },
      ds.body);
  if (!opts.empty()) {
    Json o = Json::object();
    if (opts.window) o["window"] = *opts.window;
    if (opts.truncation) o["truncation"] = *opts.truncation;
    if (opts.grading) o["grading"] = *opts.grading;
    j["options"] = o;
  }
  return j;
}

namespace io {

inline bool flat(const Json& j) {
  for (const auto& x : j)
    if (x.is_structured()) return false;
  return true;
}

inline void write_json(std::ostream& os, const Json& j, int indent) {
  if (!j.is_structured()) {
    os << j.dump();
    return;
  }
  bool obj = j.is_object();
  char open = obj ? '{' : '[', close = obj ? '}' : ']';
  if (j.empty() || flat(j)) {
    // Rows of scalars stay on one line.
    os << open;
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      os << (first ? "" : ", ");
      if (obj) os << Json(it.key()).dump() << ": ";
      os << it->dump();
      first = false;
    }
    os << close;
    return;
  }
  std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  os << open << "\n";
  bool first = true;
  for (auto it = j.begin(); it != j.end(); ++it) {
    os << (first ? "" : ",\n") << pad;
    if (obj) os << Json(it.key()).dump() << ": ";
    write_json(os, *it, indent + 2);
    first = false;
  }
  os << "\n" << std::string(static_cast<std::size_t>(indent), ' ') << close;
}

}  // namespace io

// Deterministic text for any JSON value: sorted keys, scalar rows inline.
inline std::string canonical_dump(const Json& j) {
  std::ostringstream os;
  io::write_json(os, j, 0);
  os << "\n";
  return os.str();
}

// The canonical text of a dataset.
inline std::string emit_dataset(const Dataset& ds) { return canonical_dump(dataset_json(ds)); }

inline Z2ComplexData complex_data(const Z2FreeComplex& c) {
  Z2ComplexData d;
  d.labels = c.labels();
  if (c.graded()) d.grading = c.grading();
  d.d = c.d();
  return d;
}

inline FloerData floer_data(const F2Complex& c) {
  FloerData d;
  d.labels = c.labels();
  if (c.graded()) d.grading = c.grading();
  d.d = c.d();
  return d;
}

}  // namespace polarfloer
