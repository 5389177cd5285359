// Acceptance checks. Prints one PASS/FAIL line per criterion; exits 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "polarfloer/polarfloer.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace polarfloer;

namespace {

// Records the first failed check of a criterion.
struct Outcome {
  bool ok = true;
  std::string why;
  std::size_t checks = 0;
  void check(bool cond, const std::string& what) {
    ++checks;
    if (!cond && ok) {
      ok = false;
      why = what;
    }
  }
};

const std::vector<BlockKind> kBlocks = {BlockKind::B0, BlockKind::Bplus, BlockKind::Bminus,
                                        BlockKind::Binfty};

PatternReport expected_block(BlockKind k) {
  PatternReport p;
  switch (k) {
    case BlockKind::B0: p.t_torsion = {1}; break;
    case BlockKind::Bplus: p.polynomial = 1; break;
    case BlockKind::Bminus: p.negative = 1; break;
    case BlockKind::Binfty: p.laurent = 1; break;
  }
  return p;
}

// dim of H(Č (x)^L F2[t]/(t^n)): each F2[t] and each t^-1 F2[t^-1] gives n,
// each F2[t]/(t^e) gives 2 min(e, n).
std::size_t uct_dim(const PatternReport& p, int n) {
  std::size_t d = (p.polynomial + p.negative) * static_cast<std::size_t>(n);
  for (int e : p.t_torsion) d += 2 * static_cast<std::size_t>(std::min(e, n));
  return d;
}

// Rank of the tower map from level n + 1 to level n.
std::size_t tower_rank(const PatternReport& p, int n) {
  std::size_t r = (p.polynomial + p.negative) * static_cast<std::size_t>(n);
  for (int e : p.t_torsion) r += static_cast<std::size_t>(std::min(e, n) + std::min(e, n + 1) - 1);
  return r;
}

bool is_diagonal_with(const RingMatrix<F2Poly>& m, const std::vector<F2Poly>& f) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      F2Poly want = (i == j && i < f.size()) ? f[i] : F2Poly();
      if (!(m(i, j) == want)) return false;
    }
  return true;
}

int torsion_bound(const PatternReport& p) {
  int b = 0;
  for (int e : p.t_torsion) b = std::max(b, e);
  return b;
}

void block_table(Outcome& o) {
  for (BlockKind k : kBlocks) {
    std::string name = block_name(k);
    auto a = a_f2_block_pattern(k, 8);
    auto b = borel_block_pattern(k, 8);
    o.check(a == expected_block(k), name + ": a_f2 pattern " + a.str());
    o.check(b == expected_block(k), name + ": Borel pattern " + b.str());
    ComparisonF cf = comparison_F(finite_type_blocks(k, 8));
    o.check(cf.chain_map(), name + ": F is not a chain map");
    o.check(check_comparison(cf).holds(), name + ": F is not a quasi-isomorphism");
  }
}

void ainfty_witness(Outcome& o) {
  gen::Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    Z2FreeComplex a = gen::random_finite_type(rng, 20);
    std::string tag = "sample " + std::to_string(trial);
    o.check(a.size() <= 20, tag + ": too many generators");
    ComparisonF cf = comparison_F(a);
    o.check(cf.homotopy_identity(), tag + ": tF + FT != d H + H d");
    std::vector<bool> flip(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) flip[i] = gen::coin(rng);
    TComplex t1 = a_f2(a), t2 = a_f2(relabel(a, flip));
    o.check(t1.c.d() == t2.c.d(), tag + ": relabeling changed d");
    ChainMap<Gf2> f(t1.c, t1.c, t1.T), g(t2.c, t2.c, t2.T);
    o.check(verify_homotopy(f, g, relabel_homotopy(flip)), tag + ": T + T' != dH + Hd");
  }
}

void monoidal(Outcome& o) {
  std::vector<Z2FreeComplex> blocks;
  for (BlockKind k : kBlocks) blocks.push_back(finite_type_blocks(k, k == BlockKind::B0 ? 0 : 4));
  int pairs = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (std::size_t j = i; j < blocks.size(); ++j) {
      ++pairs;
      auto r = verify_monoidal(blocks[i], blocks[j]);
      std::string tag = block_name(kBlocks[i]) + " x " + block_name(kBlocks[j]);
      o.check(r.d_tensor_matches, tag + ": tensor differential mismatch");
      o.check(r.reports_equal(), tag + ": homology reports differ");
    }
  o.check(pairs == 10, "expected 10 pairs");
}

void km_relations(Outcome& o) {
  gen::Rng rng(104);
  for (int trial = 0; trial < 100; ++trial) {
    KMDataset k = gen::random_km(rng, 30);
    std::string tag = "sample " + std::to_string(trial);
    o.check(k.generator_count() <= 30, tag + ": too many generators");
    o.check(validate_relations(k).ok(), tag + ": relations fail");
    KMTriple t = assemble(k);
    o.check((t.check.d() * t.check.d()).is_zero(), tag + ": check d^2 != 0");
    o.check((t.hat.d() * t.hat.d()).is_zero(), tag + ": hat d^2 != 0");
    auto tr = verify_triangle(t);
    o.check(tr.chain_maps, tag + ": triangle maps are not chain maps");
    o.check(tr.composites_zero, tag + ": triangle composites nonzero");
    o.check(tr.exact(), tag + ": triangle not exact");
  }
}

void canonical_model(Outcome& o) {
  for (int n = 1; n <= 5; ++n) {
    std::string tag = "n=" + std::to_string(n);
    KMTriple t = assemble(canonical_trn_dataset(n));
    o.check(verify_triangle(t).exact(), tag + ": triangle not exact");
    auto p = km_patterns(canonical_trn_source(n), -2 * n, 2 * n);
    PatternReport free_one;
    free_one.polynomial = 1;
    PatternReport laurent_one;
    laurent_one.laurent = 1;
    o.check(p.check == free_one, tag + ": check pattern " + p.check.str());
    o.check(p.hat.all_t_torsion() && p.hat.stable, tag + ": hat pattern " + p.hat.str());
    o.check(p.bar == laurent_one, tag + ": bar pattern " + p.bar.str());
    o.check(p.check.localized_rank() == p.bar.localized_rank(), tag + ": localized ranks differ");
  }
}

void localization(Outcome& o) {
  gen::Rng rng(106);
  for (int trial = 0; trial < 50; ++trial) {
    EquivariantDataset e = gen::random_equivariant(rng);
    std::string tag = "sample " + std::to_string(trial);
    auto r = localization_map(e);
    o.check(r.stable(), tag + ": windows unstable");
    o.check(r.hat.all_t_torsion() && r.localized_hat() == 0, tag + ": hat does not localize to 0");
    o.check(r.localized_check() == r.localized_bar(), tag + ": localized ranks differ");
  }
}

void porteous(Outcome& o) {
  for (int n = 1; n <= 6; ++n) {
    std::string tag = "n=" + std::to_string(n);
    o.check(two_point_twisted(n, Gf2(true)).is_zero(), tag + ": number 1 not rank 0");
    auto r = two_point_twisted(n, Gf2(false));
    o.check(r.free_rank == 2 && r.torsion.empty(), tag + ": number 0 not free of rank 2");
  }
  gen::Rng rng(107);
  for (int trial = 0; trial < 40; ++trial) {
    F2Poly p = oracle::random_poly(rng, 6);
    if (!p.coeff(0)) p += F2Poly::one();
    for (int order : {trial % 33, 32}) {
      F2Poly prod = (p * laurent_inverse_series(p, order)).truncated(order + 1);
      o.check(prod == F2Poly::one(), "series inverse of " + p.str() + " to order " + std::to_string(order));
    }
  }
}

void steenrod(Outcome& o) {
  gen::Rng rng(108);
  int graded = 0;
  for (int trial = 0; trial < 20; ++trial) {
    F2Complex v = gen::random_f2_complex(rng, gen::uniform(rng, 1, 10), trial % 4 != 3, 3);
    std::string tag = "sample " + std::to_string(trial);
    auto s = steenrod_square(v);
    o.check(s.cycles, tag + ": St(x) not a cycle");
    o.check(s.isomorphism, tag + ": Sq not an isomorphism");
    if (v.graded()) {
      ++graded;
      o.check(s.degree_doubles, tag + ": degree does not double");
    }
    o.check(s.degenerates_at_e2(), tag + ": no degeneration at E2");
  }
  o.check(graded > 0, "no graded samples");
}

void tower(Outcome& o) {
  std::vector<EquivariantDataset> sets = {canonical_trn_equivariant(2)};
  gen::Rng rng(109);
  for (int i = 0; i < 20; ++i) sets.push_back(gen::random_equivariant(rng, 8));
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& e = sets[i];
    std::string tag = i == 0 ? std::string("canonical") : "sample " + std::to_string(i);
    auto loc = localization_map(e);
    int bound = torsion_bound(loc.check);
    int top = std::max(3, bound + 2);
    std::vector<std::size_t> dims(top + 1);
    for (int n = 1; n <= top; ++n) {
      dims[n] = ss_truncate(e, n).dim;
      o.check(dims[n] == uct_dim(loc.check, n), tag + ": dim at n=" + std::to_string(n));
    }
    std::size_t slope = loc.check.polynomial + loc.check.negative;
    for (int n = std::max(1, bound); n < top; ++n)
      o.check(dims[n + 1] - dims[n] == slope, tag + ": not stable past the torsion bound");
    for (const auto& step : truncation_tower(e, 3)) {
      o.check(step.chain_map && step.compatible, tag + ": tower step " + std::to_string(step.n));
      o.check(step.rank == tower_rank(loc.check, step.n), tag + ": tower rank " + std::to_string(step.n));
    }
  }
  int regular = 0;
  for (const auto& e : sets) {
    if (!e.equivariant_regular || !e.upstairs) continue;
    ++regular;
    o.check(map_G(e).chain_map, "map_G is not a chain map");
  }
  o.check(map_G(point_pair_dataset()).chain_map, "point pair: map_G is not a chain map");
  o.check(map_G(single_point_dataset()).chain_map, "single point: map_G is not a chain map");
  o.check(regular > 0, "no regular samples");
  for (int n = 1; n <= 3; ++n) {
    o.check(g_truncation(point_pair_dataset(), n).isomorphism(), "point pair: G at n=" + std::to_string(n));
    o.check(g_truncation(single_point_dataset(), n).isomorphism(), "single point: G at n=" + std::to_string(n));
  }
}

void twisted_pages(Outcome& o) {
  gen::Rng rng(110);
  for (int trial = 0; trial < 30; ++trial) {
    TwistedDataset tw = gen::random_twisted(rng);
    std::string tag = "sample " + std::to_string(trial);
    TwistedComplex tc = build_twisted(tw);
    auto sp = twisted_spectral_pages(tc, 2);
    o.check(sp.pages.size() == 2 && sp.pages[1] == e2_page(tw), tag + ": E2 differs");
    o.check(verify_T_invertible(tc).holds(), tag + ": T not invertible");
    o.check(window_stability(tc, tw.window).holds(), tag + ": window unstable");
  }
}

void snf(Outcome& o) {
  std::mt19937_64 rng(111);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t r = 1 + rng() % 12, c = 1 + rng() % 12;
    auto m = oracle::random_poly_matrix(rng, r, c, 4, 0.5);
    auto s = snf_f2t(m);
    std::string tag = "sample " + std::to_string(trial);
    o.check(is_diagonal_with(s.U * m * s.V, s.factors), tag + ": U m V is not the diagonal");
    for (std::size_t k = 1; k < s.factors.size(); ++k)
      o.check(s.factors[k - 1].divides(s.factors[k]), tag + ": divisibility chain broken");
  }
}

}  // namespace

// With an argument k, runs only criterion k.
int main(int argc, char** argv) {
  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"block homology table", block_table},
      {"A-infinity witness", ainfty_witness},
      {"monoidal tensor", monoidal},
      {"KM relations give complexes", km_relations},
      {"canonical model", canonical_model},
      {"localization and torsion", localization},
      {"Porteous dichotomy", porteous},
      {"Steenrod squares", steenrod},
      {"truncation tower", tower},
      {"twisted spectral sequence", twisted_pages},
      {"SNF soundness", snf},
  };
  int failed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i + 1) != only) continue;
    ++ran;
    Outcome o;
    auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& ex) {
      o.ok = false;
      o.why = std::string("exception: ") + ex.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %-30s %6zu checks %6.2fs%s%s\n", o.ok ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.checks, secs, o.ok ? "" : "  ", o.why.c_str());
    std::fflush(stdout);
    if (!o.ok) ++failed;
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed ? 1 : 0;
}
