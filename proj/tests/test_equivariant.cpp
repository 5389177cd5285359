#include <catch_amalgamated.hpp>

#include "polarfloer/equivariant.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace polarfloer;

namespace {

F2Poly t_pow(int n) { return F2Poly::monomial(n); }

ModuleReport<F2Poly> torsion_report(std::vector<F2Poly> f) {
  ModuleReport<F2Poly> r;
  r.torsion = std::move(f);
  return r;
}

// F2[t] --t--> F2[t], a free presentation of F2[t]/(t).
PolyComplex t_quotient() {
  PolyMatrix d(2, 2);
  d(1, 0) = t_pow(1);
  return PolyComplex({"r", "g"}, d);
}

PolyComplex free_rank_one() { return PolyComplex({"g"}, PolyMatrix(1, 1)); }

const std::vector<BlockKind> kAllBlocks = {BlockKind::B0, BlockKind::Bplus, BlockKind::Bminus,
                                           BlockKind::Binfty};

}  // namespace

TEST_CASE("a_f2 on blocks", "[equivariant]") {
  TComplex b0 = a_f2(finite_type_blocks(BlockKind::B0, 0));
  CHECK(b0.c.d().is_zero());
  CHECK(b0.T.is_zero());
  CHECK(homology(b0.c).free_rank == 1);

  TComplex binf = a_f2(finite_type_blocks(BlockKind::Binfty, 3));
  CHECK(binf.c.d().is_zero());
  for (std::size_t j = 0; j + 1 < binf.c.size(); ++j) CHECK(binf.T(j + 1, j).v);
  CHECK(binf.T.nonzero_count() == binf.c.size() - 1);

  Z2Matrix d(2, 2);
  d(1, 0) = GroupRingElem::norm();
  TComplex two = a_f2(Z2FreeComplex({"x0", "x1"}, d));
  CHECK(two.c.d().is_zero());
  CHECK(two.T(1, 0).v);
  CHECK(two.T.nonzero_count() == 1);
}

TEST_CASE("block table", "[equivariant]") {
  for (BlockKind k : kAllBlocks) {
    auto a = a_f2_block_pattern(k, 8);
    auto b = borel_block_pattern(k, 8);
    CHECK(a == b);
    CHECK(a.stable);
  }
  CHECK(a_f2_block_pattern(BlockKind::B0, 8).t_torsion == std::vector<int>{1});
  CHECK(a_f2_block_pattern(BlockKind::Bplus, 8).polynomial == 1);
  CHECK(a_f2_block_pattern(BlockKind::Bminus, 8).negative == 1);
  CHECK(a_f2_block_pattern(BlockKind::Binfty, 8).laurent == 1);
}

TEST_CASE("Borel complexes", "[equivariant]") {
  CHECK(homology(borel(finite_type_blocks(BlockKind::B0, 0))) == torsion_report({t_pow(1)}));
  // Every class of a finite B- window is t-torsion.
  auto bm = homology(borel(finite_type_blocks(BlockKind::Bminus, 5)));
  CHECK(bm.free_rank == 0);
  for (const auto& f : bm.torsion) CHECK(f.valuation() == f.degree());
  // Regular representation: d = 0 on one free generator.
  CHECK(homology(borel(Z2FreeComplex({"x"}, Z2Matrix(1, 1)))) == torsion_report({t_pow(1)}));
  CHECK_THROWS(borel_mod_t(finite_type_blocks(BlockKind::B0, 0), 0));
}

TEST_CASE("comparison map F", "[equivariant]") {
  for (BlockKind k : kAllBlocks) {
    ComparisonF cf = comparison_F(finite_type_blocks(k, 6));
    CHECK(cf.chain_map());
    CHECK(cf.homotopy_identity());
    CHECK(check_comparison(cf).holds());
  }
}

TEST_CASE("comparison on finite-type complexes", "[equivariant][property]") {
  gen::Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    Z2FreeComplex a = gen::random_finite_type(rng, 16);
    ComparisonF cf = comparison_F(a);
    CHECK(cf.homotopy_identity());
    auto rep = check_comparison(cf);
    CHECK(rep.holds());
  }
}

TEST_CASE("A-infinity correction", "[equivariant]") {
  gen::Rng rng(22);
  std::size_t n = 4;
  F2Matrix t1 = oracle::random_f2_matrix(rng, n, n, 0.4), t2 = oracle::random_f2_matrix(rng, n, n, 0.4);
  F2Matrix h = oracle::random_f2_matrix(rng, n, n, 0.4);
  std::vector<Gf2> b(n);
  for (auto& x : b) x = Gf2(gen::coin(rng));
  auto zero = ainfty_f2(0, b, t1, t2, h);
  for (auto x : zero) CHECK_FALSE(x.v);
  CHECK(ainfty_f2(1, b, t1, t2, h) == h.apply(b));
  auto two = ainfty_f2(2, b, t1, t2, h);
  auto want = t1.apply(h.apply(b));
  auto other = h.apply(t2.apply(b));
  for (std::size_t i = 0; i < n; ++i) CHECK(two[i] == want[i] + other[i]);
  CHECK_THROWS(ainfty_f2(-1, b, t1, t2, h));
}

TEST_CASE("relabeling changes T by an exact term", "[equivariant][property]") {
  gen::Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    Z2FreeComplex a = gen::random_finite_type(rng, 12);
    std::vector<bool> flip(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) flip[i] = gen::coin(rng);
    TComplex t1 = a_f2(a), t2 = a_f2(relabel(a, flip));
    CHECK(t1.c.d() == t2.c.d());
    ChainMap<Gf2> f(t1.c, t1.c, t1.T), g(t2.c, t2.c, t2.T);
    CHECK(verify_homotopy(f, g, relabel_homotopy(flip)));
  }
}

TEST_CASE("a_f2 is functorial", "[equivariant][property]") {
  gen::Rng rng(24);
  auto pick = [](gen::Rng& r) {
    static const GroupRingElem all[] = {GroupRingElem::one(), GroupRingElem::iota(),
                                        GroupRingElem::norm()};
    return all[gen::uniform(r, 0, 2)];
  };
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = static_cast<std::size_t>(gen::uniform(rng, 1, 6));
    Z2Matrix f(n, n), g(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (gen::coin(rng, 0.4)) f(i, j) = pick(rng);
        if (gen::coin(rng, 0.4)) g(i, j) = pick(rng);
      }
    CHECK(augment(f * g) == augment(f) * augment(g));
  }
}

TEST_CASE("finite-type blocks", "[equivariant]") {
  auto b0 = finite_type_blocks(BlockKind::B0, 0);
  CHECK(b0.size() == 1);
  CHECK(b0.d().is_zero());
  auto bp = finite_type_blocks(BlockKind::Bplus, 3);
  CHECK(bp.size() == 3);
  CHECK(bp.d().nonzero_count() == 2);
  CHECK(bp.d()(1, 0) == GroupRingElem::norm());
  auto bi = finite_type_blocks(BlockKind::Binfty, 1);
  CHECK(bi.size() == 3);
  CHECK(bi.d().nonzero_count() == 2);
  CHECK_THROWS(finite_type_blocks(BlockKind::Bminus, 0));
  CHECK(parse_block_kind("Binfty") == BlockKind::Binfty);
  CHECK_THROWS(parse_block_kind("B7"));
}

TEST_CASE("derived tensor", "[equivariant]") {
  CHECK(homology(derived_tensor(t_quotient(), t_quotient())) == torsion_report({t_pow(1), t_pow(1)}));
  CHECK(homology(derived_tensor(t_quotient(), free_rank_one())) == homology(t_quotient()));
  auto ff = homology(derived_tensor(free_rank_one(), free_rank_one()));
  CHECK(ff.free_rank == 1);
  CHECK(ff.torsion.empty());
}

TEST_CASE("derived tensor is symmetric", "[equivariant][property]") {
  gen::Rng rng(25);
  for (int trial = 0; trial < 15; ++trial) {
    PolyComplex a = borel(gen::random_finite_type(rng, 5));
    PolyComplex b = borel(gen::random_finite_type(rng, 5));
    CHECK(homology(derived_tensor(a, b)) == homology(derived_tensor(b, a)));
  }
}

TEST_CASE("tensor over the group ring", "[equivariant]") {
  auto b0 = finite_type_blocks(BlockKind::B0, 0);
  auto bb = tensor_z2(b0, b0);
  CHECK(bb.size() == 2);
  CHECK(bb.d().is_zero());
  auto bp = tensor_z2(b0, finite_type_blocks(BlockKind::Bplus, 2));
  CHECK(bp.size() == 4);
  CHECK(bp.d().nonzero_count() == 4);
  Z2FreeComplex empty({}, Z2Matrix(0, 0));
  CHECK(tensor_z2(bp, empty).size() == 0);
}

TEST_CASE("monoidal comparison on blocks", "[equivariant]") {
  std::vector<Z2FreeComplex> blocks = {
      finite_type_blocks(BlockKind::B0, 0), finite_type_blocks(BlockKind::Bplus, 4),
      finite_type_blocks(BlockKind::Bminus, 4), finite_type_blocks(BlockKind::Binfty, 4)};
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (std::size_t j = i; j < blocks.size(); ++j) {
      auto r = verify_monoidal(blocks[i], blocks[j]);
      CHECK(r.d_tensor_matches);
      CHECK(r.reports_equal());
    }
  auto r = verify_monoidal(blocks[0], blocks[0]);
  CHECK(r.borel_side == torsion_report({t_pow(1), t_pow(1)}));
}
