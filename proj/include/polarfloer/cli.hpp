// Command dispatch for the polarfloer tool. A report is a human-readable
// section, a line "---", and a JSON document that depends only on the
// input file and the flags.
#pragma once

#include <chrono>
#include <cstddef>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "polarfloer/dataset_io.hpp"
#include "polarfloer/equiv_floer.hpp"
#include "polarfloer/equivariant.hpp"
#include "polarfloer/morse_km.hpp"
#include "polarfloer/twisted.hpp"

namespace polarfloer {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitSchema = 2;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"validate", "homology", "km",       "twisted",
                                                 "localize", "steenrod", "kunneth",  "ss-compare",
                                                 "smith",    "porteous", "blocks"};
  return names;
}

// Unknown command, unusable arguments or a dataset of the wrong kind.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommandArgs {
  std::string target;  // dataset path, or the block kind for `blocks`
  std::optional<int> window;
  std::optional<int> truncate;
  bool grading = false;
  std::optional<std::string> out;
};

// POLARFLOER_VERBOSE adds timing to the human section; POLARFLOER_WINDOW is
// the window used when neither the flag nor the file sets one.
struct CliEnvironment {
  int verbosity = 0;
  std::optional<int> window;

  static CliEnvironment from_process() {
    CliEnvironment env;
    auto read = [](const char* name) -> std::optional<int> {
      const char* v = std::getenv(name);
      if (!v || !*v) return std::nullopt;
      try {
        std::size_t used = 0;
        int x = std::stoi(v, &used);
        if (used == std::string(v).size()) return x;
      } catch (const std::exception&) {
      }
      throw UsageError(std::string(name) + " must be an integer, got '" + v + "'");
    };
    env.verbosity = read("POLARFLOER_VERBOSE").value_or(0);
    env.window = read("POLARFLOER_WINDOW");
    return env;
  }
};

struct Report {
  int exit_code = kExitOk;
  std::string human;
  Json machine = Json::object();
  std::optional<std::string> document;  // `blocks` prints a dataset instead

  std::string text() const {
    if (document) return *document;
    return human + "---\n" + canonical_dump(machine);
  }
};

namespace cli {

template <class R>
Json module_json(const ModuleReport<R>& m) {
  Json t = Json::array();
  for (const auto& f : m.torsion) t.push_back(RingTraits<R>::format(f));
  return {{"free_rank", m.free_rank}, {"torsion", t}};
}

inline Json pattern_json(const PatternReport& p) {
  Json other = Json::array();
  for (const auto& f : p.other_torsion) other.push_back(f.str());
  return {{"polynomial", p.polynomial},   {"negative", p.negative},
          {"laurent", p.laurent},         {"t_torsion", p.t_torsion},
          {"other_torsion", other},       {"stable", p.stable},
          {"localized_rank", p.localized_rank()}};
}

inline Json dims_json(const std::map<int, std::size_t>& dims) {
  Json j = Json::object();
  for (const auto& [k, d] : dims) j[std::to_string(k)] = d;
  return j;
}

inline std::string yes(bool b) { return b ? "yes" : "no"; }

// Accumulates one report.
struct Builder {
  std::ostringstream h;
  Json m = Json::object();
  bool ok = true;

  void line(const std::string& s) { h << s << "\n"; }
  void check(const std::string& name, bool holds) {
    ok = ok && holds;
    line("  " + name + ": " + (holds ? "holds" : "FAILS"));
  }
};

struct Context {
  std::string command;
  const CommandArgs& args;
  const Dataset& ds;
  const CliEnvironment& env;

  // Flag, then file option, then environment, then the command default.
  int window(int fallback) const {
    if (args.window) return *args.window;
    if (ds.options.window) return *ds.options.window;
    return env.window.value_or(fallback);
  }
  std::optional<int> explicit_window() const {
    if (args.window) return args.window;
    if (ds.options.window) return ds.options.window;
    return env.window;
  }
  int truncation(int fallback) const {
    if (args.truncate) return *args.truncate;
    return ds.options.truncation.value_or(fallback);
  }
  bool grading() const { return args.grading || ds.options.grading.value_or(false); }
};

[[noreturn]] inline void incompatible(const Context& c) {
  throw UsageError("command '" + c.command + "' does not accept a dataset of kind " + c.ds.kind());
}

inline const TwistedDataset& twisted_of(const Context& c) {
  if (auto* t = std::get_if<TwistedData>(&c.ds.body)) return t->dataset;
  if (auto* e = std::get_if<EquivariantDataset>(&c.ds.body)) return e->boundary;
  incompatible(c);
}

inline const EquivariantDataset& equivariant_of(const Context& c) {
  if (auto* e = std::get_if<EquivariantDataset>(&c.ds.body)) return *e;
  incompatible(c);
}

inline void triangle_section(Builder& b, const KMTriple& t) {
  TriangleReport tr = verify_triangle(t);
  b.line("exact triangle (F2 dimensions): hat " + std::to_string(tr.dim_hat) + ", check " +
         std::to_string(tr.dim_check) + ", bar " + std::to_string(tr.dim_bar));
  b.check("j*, i*, connecting map are chain maps", tr.chain_maps);
  b.check("composites vanish", tr.composites_zero);
  b.check("exact at every slot", tr.exact_at_check && tr.exact_at_bar && tr.exact_at_hat);
  b.m["triangle"] = {{"chain_maps", tr.chain_maps},
                     {"composites_zero", tr.composites_zero},
                     {"exact_at_check", tr.exact_at_check},
                     {"exact_at_bar", tr.exact_at_bar},
                     {"exact_at_hat", tr.exact_at_hat},
                     {"dim_check", tr.dim_check},
                     {"dim_hat", tr.dim_hat},
                     {"dim_bar", tr.dim_bar},
                     {"rank_j", tr.rank_j},
                     {"rank_i", tr.rank_i},
                     {"rank_connecting", tr.rank_connecting}};
}

inline void km_homology_section(Builder& b, const KMTriple& t) {
  KMHomology h = km_homology(t);
  Json j = {{"dim_check", h.dim_check}, {"dim_hat", h.dim_hat}, {"dim_bar", h.dim_bar}};
  b.line("F2 dimensions: check " + std::to_string(h.dim_check) + ", hat " + std::to_string(h.dim_hat) +
         ", bar " + std::to_string(h.dim_bar));
  if (h.check) {
    b.line("over F2[t]: check " + h.check->str() + "; hat " + h.hat->str() + "; bar " + h.bar->str());
    j["check"] = module_json(*h.check);
    j["hat"] = module_json(*h.hat);
    j["bar"] = module_json(*h.bar);
  }
  b.m["homology"] = j;
}

inline void patterns_section(Builder& b, const PatternReport& check, const PatternReport& hat,
                             const PatternReport& bar) {
  b.line("check: " + check.str());
  b.line("hat:   " + hat.str());
  b.line("bar:   " + bar.str());
  b.m["patterns"] = {{"check", pattern_json(check)}, {"hat", pattern_json(hat)}, {"bar", pattern_json(bar)}};
}

inline void km_checked(Builder& b, const KMDataset& k) {
  RelationReport rel = validate_relations(k);
  Json checks = Json::array();
  for (const auto& c : rel.checks) {
    Json o = {{"name", c.name}, {"ok", c.ok}};
    if (!c.ok) o["witness"] = c.witness;
    checks.push_back(o);
    b.check(c.name + " = 0", c.ok);
    if (!c.ok) b.h << "    witness (nonzero matrix):\n" << c.witness;
  }
  b.m["relations"] = checks;
}

// ---------------------------------------------------------------------------
// Commands.

inline void cmd_validate(const Context& c, Builder& b) {
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, Z2ComplexData> || std::is_same_v<T, FloerData>) {
          auto cx = body.complex();
          b.line("complex with " + std::to_string(cx.size()) + " generators" + (cx.graded() ? ", graded" : ""));
          b.check("d^2 = 0", true);
          b.m["generators"] = cx.size();
          b.m["graded"] = cx.graded();
          if constexpr (std::is_same_v<T, FloerData>) {
            if (body.product_model) {
              EquivariantModel m = validate_equivariant(*body.product_model);
              b.check("product model is a valid equivariant dataset", true);
              b.m["product_model_points"] = m.point_count();
            }
          }
        } else if constexpr (std::is_same_v<T, KMDataset>) {
          b.line("km dataset: " + std::to_string(body.o.size()) + " interior, " + std::to_string(body.s.size()) +
                 " boundary-stable, " + std::to_string(body.u.size()) + " boundary-unstable generators");
          b.m["generators"] = {{"o", body.o.size()}, {"s", body.s.size()}, {"u", body.u.size()}};
          b.m["lifted"] = body.lifted;
          km_checked(b, body);
        } else if constexpr (std::is_same_v<T, TwistedData>) {
          TwistedComplex tc = build_twisted(body.dataset);
          b.line("twisted dataset: " + std::to_string(tc.model.size()) + " points, " +
                 std::to_string(tc.model.classes.size()) + " classes" + (tc.model.graded ? ", graded" : ""));
          b.check("classes admissible, local system additive, lift consistent", true);
          b.m["points"] = tc.model.size();
          b.m["classes"] = tc.model.classes.size();
          b.m["graded"] = tc.model.graded;
          if (body.porteous) {
            Gf2 coef = porteous_coefficient(body.porteous->total_sw, body.porteous->n, body.porteous->pairing);
            b.m["porteous_coefficient"] = coef.v ? 1 : 0;
          }
        } else {
          EquivariantModel m = validate_equivariant(body);
          EquivariantAssembly a = assemble_equivariant(body, c.explicit_window());
          b.line("equivariant dataset: " + std::to_string(m.pair_count()) + " free pairs, " +
                 std::to_string(m.point_count()) + " invariant points, " + std::to_string(m.counts.size()) +
                 " interior counts");
          b.check("interior counts satisfy the dimension formula and raise degree", true);
          b.check("assembles on window " + std::to_string(a.window), true);
          b.m["pairs"] = m.pair_count();
          b.m["points"] = m.point_count();
          b.m["interior"] = m.counts.size();
          b.m["window"] = a.window;
          b.m["graded"] = m.graded;
          b.m["upstairs"] = m.has_upstairs;
        }
      },
      c.ds.body);
}

inline void cmd_homology(const Context& c, Builder& b) {
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, Z2ComplexData>) {
          Z2FreeComplex cx = body.complex();
          TComplex a = a_f2(cx);
          auto tm = tmodule_report(a);
          auto bh = homology(borel(cx));
          QuasiIsoReport q = check_comparison(comparison_F(cx));
          std::size_t dim = homology(a.c).free_rank;
          b.line("H(A_F2): dimension " + std::to_string(dim) + ", over F2[t]: " + tm.str());
          b.line("Borel homology over F2[t]: " + bh.str());
          b.check("comparison map F is a quasi-isomorphism", q.holds());
          b.m["a_f2"] = {{"dim", dim}, {"module", module_json(tm)}};
          b.m["borel"] = module_json(bh);
          b.m["comparison_quasi_iso"] = q.holds();
          if (c.grading() && a.c.graded() && a.c.size()) {
            auto [lo, hi] = std::minmax_element(a.c.grading().begin(), a.c.grading().end());
            auto dims = degree_dims(a.c, *lo, *hi);
            b.m["a_f2_degrees"] = dims_json(dims);
          }
        } else if constexpr (std::is_same_v<T, FloerData>) {
          F2Complex v = body.complex();
          std::size_t dim = homology(v).free_rank;
          b.line("F2 homology: dimension " + std::to_string(dim));
          b.m["dim"] = dim;
          if (c.grading() && v.graded() && v.size()) {
            auto [lo, hi] = std::minmax_element(v.grading().begin(), v.grading().end());
            auto dims = degree_dims(v, *lo, *hi);
            for (const auto& [k, d] : dims)
              if (d) b.line("  degree " + std::to_string(k) + ": " + std::to_string(d));
            b.m["degrees"] = dims_json(dims);
          }
        } else if constexpr (std::is_same_v<T, TwistedData>) {
          auto h = twisted_homology(build_twisted(body.dataset));
          b.line("twisted homology over F2[t,t^-1]: " + h.str());
          b.m["twisted"] = module_json(h);
        } else if constexpr (std::is_same_v<T, KMDataset>) {
          km_homology_section(b, assemble(body));
        } else {
          EquivariantAssembly a = assemble_equivariant(body, c.explicit_window());
          b.line("window " + std::to_string(a.window));
          b.m["window"] = a.window;
          km_homology_section(b, a.triple);
        }
      },
      c.ds.body);
}

inline void cmd_km(const Context& c, Builder& b) {
  if (auto* k = std::get_if<KMDataset>(&c.ds.body)) {
    km_checked(b, *k);
    if (!b.ok) return;
    KMTriple t = assemble(*k);
    triangle_section(b, t);
    km_homology_section(b, t);
    bool levels = false;
    for (const auto* part : {&k->o, &k->s, &k->u})
      for (const auto& g : *part) levels = levels || g.level.has_value();
    if (k->lifted && levels) {
      KMPatterns p = km_patterns(*k);
      patterns_section(b, p.check, p.hat, p.bar);
    }
  } else if (auto* e = std::get_if<EquivariantDataset>(&c.ds.body)) {
    EquivariantAssembly a = assemble_equivariant(*e, c.explicit_window());
    b.line("window " + std::to_string(a.window));
    b.m["window"] = a.window;
    triangle_section(b, a.triple);
    km_homology_section(b, a.triple);
  } else {
    incompatible(c);
  }
}

inline void cmd_twisted(const Context& c, Builder& b) {
  const TwistedDataset& tw = twisted_of(c);
  TwistedComplex tc = build_twisted(tw);
  auto h = twisted_homology(tc);
  auto e2 = e2_page(tw);
  auto sp = twisted_spectral_pages(tc, 3);
  TInvertibility ti = verify_T_invertible(tc);
  int window = c.window(tw.window);
  WindowStability ws = window_stability(tc, window);
  b.line("twisted homology over F2[t,t^-1]: " + h.str());
  b.line("E2 page: " + e2.str());
  if (sp.degeneration_page) b.line("action spectral sequence degenerates at E" + std::to_string(*sp.degeneration_page));
  b.check("T commutes with d and is invertible", ti.holds());
  b.check("spectral sequence E2 matches the E2 page", sp.pages.size() >= 2 && sp.pages[1] == e2);
  if (ws.applicable) b.check("windows " + std::to_string(window) + " and " + std::to_string(window + 1) + " agree", ws.holds());
  else b.line("  window stability: not applicable (ungraded data)");
  Json pages = Json::array();
  for (const auto& p : sp.pages) pages.push_back(module_json(p));
  b.m["homology"] = module_json(h);
  b.m["e2"] = module_json(e2);
  b.m["pages"] = pages;
  b.m["degeneration_page"] = sp.degeneration_page ? Json(*sp.degeneration_page) : Json();
  b.m["t_invertible"] = ti.holds();
  b.m["window"] = window;
  b.m["window_stability"] = {{"applicable", ws.applicable},
                             {"holds", ws.applicable && ws.holds()},
                             {"at_n", dims_json(ws.at_n)},
                             {"at_n1", dims_json(ws.at_n1)}};
}

inline void cmd_localize(const Context& c, Builder& b) {
  if (auto* e = std::get_if<EquivariantDataset>(&c.ds.body)) {
    LocalizationResult r = localization_map(*e, c.explicit_window());
    b.line("window " + std::to_string(r.window));
    patterns_section(b, r.check, r.hat, r.bar);
    b.line("localized ranks: check " + std::to_string(r.localized_check()) + ", hat " +
           std::to_string(r.localized_hat()) + ", bar " + std::to_string(r.localized_bar()) + ", twisted " +
           std::to_string(r.twisted_rank));
    b.check("window patterns are stable", r.stable());
    b.check("hat vanishes after inverting t", r.hat_vanishes());
    b.check("localized ranks of check and bar agree", r.ranks_equal());
    b.m["window"] = r.window;
    b.m["localized"] = {{"check", r.localized_check()},
                        {"hat", r.localized_hat()},
                        {"bar", r.localized_bar()},
                        {"twisted", r.twisted_rank}};
    b.m["rank_i_star"] = r.rank_i_star;
    b.m["ranks_equal"] = r.ranks_equal();
  } else if (auto* k = std::get_if<KMDataset>(&c.ds.body)) {
    if (!k->lifted) throw KMError("localization needs a Z/2-lifted km dataset");
    km_checked(b, *k);
    if (!b.ok) return;
    KMPatterns p = km_patterns(*k);
    patterns_section(b, p.check, p.hat, p.bar);
    std::size_t lc = p.check.localized_rank(), lh = p.hat.localized_rank(), lb = p.bar.localized_rank();
    b.line("localized ranks: check " + std::to_string(lc) + ", hat " + std::to_string(lh) + ", bar " +
           std::to_string(lb));
    b.check("window patterns are stable", p.check.stable && p.hat.stable && p.bar.stable);
    b.check("hat vanishes after inverting t", lh == 0 && p.hat.all_t_torsion());
    b.check("localized ranks of check and bar agree", lc == lb);
    b.m["localized"] = {{"check", lc}, {"hat", lh}, {"bar", lb}};
    b.m["ranks_equal"] = lc == lb;
  } else {
    incompatible(c);
  }
}

inline void cmd_steenrod(const Context& c, Builder& b) {
  auto* f = std::get_if<FloerData>(&c.ds.body);
  if (!f) incompatible(c);
  F2Complex v = f->complex();
  SteenrodReport r = steenrod_square(v, f->product_model);
  b.line(std::string(f->product_model ? "supplied product model" : "diagonal model") + "; dim H = " +
         std::to_string(r.homology_dim) + ", twisted rank " + std::to_string(r.twisted_rank));
  Json sq = Json::array();
  for (std::size_t k = 0; k < r.sq.size(); ++k) {
    Json row = Json::array();
    std::string s;
    for (const auto& e : r.sq[k]) {
      row.push_back(e.str());
      s += (s.empty() ? "" : ", ") + e.str();
    }
    sq.push_back(row);
    b.line("  Sq(class " + std::to_string(k) + ") = (" + s + ")");
  }
  b.check("St(x) are cycles", r.cycles);
  b.check("Sq (x) F2[t,t^-1] is an isomorphism", r.isomorphism);
  if (r.graded) {
    b.check("Sq doubles degree", r.degree_doubles);
    b.line(std::string("  only Sq^0 is nonzero: ") + yes(r.only_sq0));
  }
  b.check("action spectral sequence degenerates at E2", r.degenerates_at_e2());
  b.m["homology_dim"] = r.homology_dim;
  b.m["twisted_rank"] = r.twisted_rank;
  b.m["sq"] = sq;
  b.m["cycles"] = r.cycles;
  b.m["isomorphism"] = r.isomorphism;
  b.m["graded"] = r.graded;
  b.m["degree_doubles"] = r.graded && r.degree_doubles;
  b.m["only_sq0"] = r.graded && r.only_sq0;
  b.m["degeneration_page"] = r.degeneration_page ? Json(*r.degeneration_page) : Json();
}

// H(C (x) C) against H(C) (x) H(C) + Tor(H(C), H(C)) over F2[t,t^-1]: the
// predicted module is presented by a block matrix and reduced to invariant factors.
inline void cmd_kunneth(const Context& c, Builder& b) {
  if (auto* z = std::get_if<Z2ComplexData>(&c.ds.body)) {
    Z2FreeComplex cx = z->complex();
    MonoidalReport r = verify_monoidal(cx, cx);
    b.line("(A (x) A)[t] with d_borel: " + r.borel_side.str());
    b.line("A[t] (x)^L A[t]: " + r.tensor_side.str());
    b.check("explicit tensor differential matches", r.d_tensor_matches);
    b.check("homology reports agree", r.reports_equal());
    b.m["borel_side"] = module_json(r.borel_side);
    b.m["tensor_side"] = module_json(r.tensor_side);
    b.m["d_tensor_matches"] = r.d_tensor_matches;
    return;
  }
  const TwistedDataset& tw = twisted_of(c);
  TwistedComplex tc = build_twisted(tw);
  auto h = twisted_homology(tc);
  auto hh = homology(tensor(tc.compressed, tc.compressed));
  std::size_t r = h.free_rank, nt = h.torsion.size();
  std::size_t rows = r * r + 2 * r * nt + 2 * nt * nt;
  LaurentMatrix pres(rows, rows + 2 * nt * nt);
  // Free summands are zero rows; each torsion pair (f, g) presents F/(f, g).
  std::size_t row = r * r, col = r * r;
  for (std::size_t k = 0; k < 2 * r; ++k)
    for (const auto& f : h.torsion) pres(row++, col++) = f;
  for (const auto& f : h.torsion)
    for (const auto& g : h.torsion)
      for (int copy = 0; copy < 2; ++copy) {
        pres(row, col++) = f;
        pres(row++, col++) = g;
      }
  ModuleReport<F2Laurent> want;
  std::size_t nonzero = 0;
  for (const auto& f : snf_laurent(pres)) {
    if (f.is_zero()) continue;
    ++nonzero;
    if (!f.is_unit()) want.torsion.push_back(f.times_monomial(-f.min_exponent()));
  }
  want.free_rank = rows - nonzero;
  ModuleReport<F2Laurent> got = hh;
  for (auto& f : got.torsion) f = f.times_monomial(-f.min_exponent());
  b.line("H(C) = " + h.str());
  b.line("H(C (x) C) = " + hh.str());
  b.line("H(C) (x) H(C) + Tor = " + want.str());
  b.check("Kunneth formula", got == want);
  b.m["homology"] = module_json(h);
  b.m["tensor_homology"] = module_json(hh);
  b.m["predicted"] = module_json(want);
}

inline void cmd_ss_compare(const Context& c, Builder& b) {
  const EquivariantDataset& e = equivariant_of(c);
  int n = c.truncation(3);
  if (n < 1) throw UsageError("--truncate must be at least 1");
  Json levels = Json::array();
  for (int k = 1; k <= n; ++k) {
    TruncationReport t = ss_truncate(e, k);
    b.line("n = " + std::to_string(k) + ": dim " + std::to_string(t.dim) + ", over F2[t]: " + t.module.str());
    levels.push_back({{"n", k}, {"dim", t.dim}, {"module", module_json(t.module)}});
  }
  b.m["truncations"] = levels;
  Json steps = Json::array();
  bool compatible = true;
  for (const auto& st : truncation_tower(e, n)) {
    compatible = compatible && st.compatible;
    steps.push_back({{"n", st.n},
                     {"dim_upper", st.dim_upper},
                     {"dim_lower", st.dim_lower},
                     {"rank", st.rank},
                     {"chain_map", st.chain_map},
                     {"compatible", st.compatible}});
  }
  b.check("tower maps are compatible quotients", compatible);
  b.m["tower"] = steps;
  if (e.equivariant_regular && e.upstairs) {
    GMap g = map_G(e);
    b.check("G is a chain map", g.chain_map);
    Json gt = Json::array();
    for (int k = 1; k <= n; ++k) {
      GTruncation r = g_truncation(e, k);
      b.check("G is an isomorphism mod t^" + std::to_string(k), r.isomorphism());
      gt.push_back({{"n", k},
                    {"chain_map", r.chain_map},
                    {"borel_dim", r.borel_dim},
                    {"source_dim", r.source_dim},
                    {"target_dim", r.target_dim},
                    {"rank", r.rank},
                    {"isomorphism", r.isomorphism()}});
    }
    b.m["g_chain_map"] = g.chain_map;
    b.m["g_truncation"] = gt;
  } else {
    b.line("  map G: not applicable (needs an equivariant-regular dataset with upstairs data)");
  }
}

inline void cmd_smith(const Context& c, Builder& b) {
  SmithReport r = smith_report(equivariant_of(c));
  b.line("dim HF upstairs " + std::to_string(r.upstairs_dim) + ", twisted rank of the fixed set " +
         std::to_string(r.twisted_rank));
  b.check("Smith inequality", r.holds());
  b.line(std::string("  equality: ") + yes(r.equality()));
  b.m["upstairs_dim"] = r.upstairs_dim;
  b.m["twisted_rank"] = r.twisted_rank;
  b.m["equality"] = r.equality();
}

inline void cmd_porteous(const Context& c, Builder& b) {
  auto* t = std::get_if<TwistedData>(&c.ds.body);
  if (!t) incompatible(c);
  if (!t->porteous) throw UsageError("porteous needs a 'porteous' block with total_sw, n and pairing");
  const PorteousData& p = *t->porteous;
  Gf2 coef = porteous_coefficient(p.total_sw, p.n, p.pairing);
  auto two = two_point_twisted(p.n, coef);
  b.line("total class " + p.total_sw.str() + ", n = " + std::to_string(p.n) + ": coefficient " +
         (coef.v ? "1" : "0"));
  b.line("two-point twisted homology: " + two.str());
  b.check("rank 0 when the coefficient is 1, free rank 2 otherwise",
          coef.v ? two.is_zero() : two.free_rank == 2 && two.torsion.empty());
  auto own = twisted_homology(build_twisted(t->dataset));
  b.line("dataset twisted homology: " + own.str());
  b.m["coefficient"] = coef.v ? 1 : 0;
  b.m["two_point"] = module_json(two);
  b.m["dataset"] = module_json(own);
}

inline constexpr int kDefaultBlockWindow = 8;

inline Report run_blocks(const CommandArgs& args, const CliEnvironment& env) {
  BlockKind k;
  try {
    k = parse_block_kind(args.target);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  int size = args.window ? *args.window : env.window.value_or(kDefaultBlockWindow);
  Z2FreeComplex block;
  try {
    block = finite_type_blocks(k, size);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Dataset ds{{}, complex_data(block)};
  Report rep;
  std::string doc = emit_dataset(ds);
  if (!args.out) {
    rep.document = doc;
    return rep;
  }
  std::ofstream out(*args.out, std::ios::binary);
  if (!out) throw UsageError("cannot write " + *args.out);
  out << doc;
  rep.human = block_name(k) + " on window " + std::to_string(size) + ": " + std::to_string(block.size()) +
              " generators written to " + *args.out + "\n";
  rep.machine = {{"command", "blocks"}, {"block", block_name(k)}, {"window", size}, {"generators", block.size()}};
  return rep;
}

}  // namespace cli

// Runs one command on a parsed dataset. Failures of the module contracts
// give exit code 1; usage errors propagate as UsageError.
inline Report run_command(const std::string& name, const CommandArgs& args, const Dataset& ds,
                          const CliEnvironment& env = {}) {
  cli::Context c{name, args, ds, env};
  cli::Builder b;
  auto start = std::chrono::steady_clock::now();
  Json echo = {{"kind", ds.kind()}, {"grading", c.grading()}};
  if (args.window) echo["window"] = *args.window;
  if (args.truncate) echo["truncate"] = *args.truncate;
  b.line(name + " (" + ds.kind() + ")");
  std::optional<std::string> error;
  try {
    if (name == "validate") cli::cmd_validate(c, b);
    else if (name == "homology") cli::cmd_homology(c, b);
    else if (name == "km") cli::cmd_km(c, b);
    else if (name == "twisted") cli::cmd_twisted(c, b);
    else if (name == "localize") cli::cmd_localize(c, b);
    else if (name == "steenrod") cli::cmd_steenrod(c, b);
    else if (name == "kunneth") cli::cmd_kunneth(c, b);
    else if (name == "ss-compare") cli::cmd_ss_compare(c, b);
    else if (name == "smith") cli::cmd_smith(c, b);
    else if (name == "porteous") cli::cmd_porteous(c, b);
    else if (name == "blocks") throw UsageError("blocks takes a block kind, not a dataset");
    else throw UsageError("unknown command '" + name + "'");
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    error = e.what();
  }
  Report rep;
  if (error) {
    b.ok = false;
    b.line("validation failed: " + *error);
    b.m["error"] = *error;
  }
  if (env.verbosity > 0) {
    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream t;
    t.precision(3);
    t << std::fixed << ms;
    b.line("time: " + t.str() + " ms");
  }
  b.line(b.ok ? "result: ok" : "result: FAILED");
  b.m["command"] = name;
  b.m["arguments"] = echo;
  b.m["ok"] = b.ok;
  rep.exit_code = b.ok ? kExitOk : kExitValidation;
  rep.human = b.h.str();
  rep.machine = b.m;
  return rep;
}

// Parses the dataset and runs the command; schema and usage errors give
// exit code 2 with the error list in both sections.
inline Report run_cli(const std::string& name, const CommandArgs& args, const CliEnvironment& env = {}) {
  auto usage_report = [&](const std::vector<std::string>& errors, const std::string& what,
                          const std::string& key) {
    Report rep;
    rep.exit_code = kExitSchema;
    std::ostringstream h;
    h << what << ":\n";
    for (const auto& e : errors) h << "  " << e << "\n";
    rep.human = h.str();
    rep.machine = {{"command", name}, {"ok", false}, {key, errors}};
    return rep;
  };
  try {
    bool known = false;
    for (const auto& c : command_names()) known = known || c == name;
    if (!known) throw UsageError("unknown command '" + name + "'");
    if (name == "blocks") return cli::run_blocks(args, env);
    return run_command(name, args, parse_dataset(args.target), env);
  } catch (const SchemaError& e) {
    return usage_report(e.errors(), "schema error", "schema_errors");
  } catch (const UsageError& e) {
    return usage_report({e.what()}, "usage error", "usage_errors");
  }
}

}  // namespace polarfloer
