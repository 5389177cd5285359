#include <catch_amalgamated.hpp>

#include "polarfloer/equiv_floer.hpp"
#include "support/generators.hpp"

using namespace polarfloer;

namespace {

F2Complex one_generator() { return F2Complex({"a"}, F2Matrix(1, 1), std::vector<int>{0}); }

// dim of H(Č (x)^L F2[t]/(t^n)) from the pattern of Ȟ: each F2[t] and each
// t^-1 F2[t^-1] contributes n, each F2[t]/(t^e) contributes 2 min(e, n).
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

}  // namespace

TEST_CASE("validation of equivariant datasets", "[equiv_floer]") {
  EquivariantDataset e = canonical_trn_equivariant(2);
  CHECK_NOTHROW(validate_equivariant(e));

  EquivariantDataset unknown = e;
  unknown.interior.push_back({InteriorKind::oo, "y1", "nope", 1, GroupRingElem::one(), std::nullopt, std::nullopt});
  CHECK_THROWS_WITH(validate_equivariant(unknown), Catch::Matchers::ContainsSubstring("unknown pair"));

  EquivariantDataset mu = e;
  mu.interior[0].mu = 0;
  CHECK_THROWS_AS(validate_equivariant(mu), EquivariantError);

  EquivariantDataset index = e;
  index.interior[0].source_index = 3;
  CHECK_THROWS_WITH(validate_equivariant(index), Catch::Matchers::ContainsSubstring("dimension formula"));

  EquivariantDataset degree = e;
  degree.pairs[0].degree = 5;
  CHECK_THROWS_WITH(validate_equivariant(degree), Catch::Matchers::ContainsSubstring("degree"));

  EquivariantDataset us = single_point_dataset();
  us.interior.push_back({InteriorKind::us, "x", "x", 1, GroupRingElem::one(), std::nullopt, std::nullopt});
  CHECK_THROWS_WITH(validate_equivariant(us), Catch::Matchers::ContainsSubstring("source eigenvalue index"));

  EquivariantDataset dup = e;
  dup.pairs.push_back({"x", std::nullopt, 0});
  CHECK_THROWS_WITH(validate_equivariant(dup), Catch::Matchers::ContainsSubstring("used twice"));

  EquivariantDataset up = e;
  up.upstairs->push_back({"y2", "y1"});
  CHECK_THROWS_AS(validate_equivariant(up), EquivariantError);
}

TEST_CASE("assembly in degenerate cases", "[equiv_floer]") {
  gen::Rng rng(51);
  // No invariant points: both complexes are the Floer complex of the pairs.
  EquivariantDataset free = gen::random_free_action(rng, 5);
  auto a = assemble_equivariant(free);
  CHECK(a.triple.check.d() == a.triple.hat.d());
  CHECK(a.triple.bar.size() == 0);

  // No pairs: everything comes from the ladders.
  auto p = assemble_equivariant(single_point_dataset());
  CHECK(p.km.o.empty());
  CHECK(p.triple.bar.size() == p.km.s.size() + p.km.u.size());
  auto loc = localization_map(single_point_dataset());
  CHECK(loc.check.polynomial == 1);
  CHECK(loc.hat.negative == 1);
  CHECK(loc.bar.laurent == 1);

  CHECK_THROWS_WITH(assemble_equivariant(canonical_trn_equivariant(3), 1),
                    Catch::Matchers::ContainsSubstring("too small"));
}

TEST_CASE("localization on the canonical model", "[equiv_floer]") {
  for (int n = 1; n <= 4; ++n) {
    auto r = localization_map(canonical_trn_equivariant(n));
    CHECK(r.check.polynomial == 1);
    CHECK(r.check.t_torsion.empty());
    CHECK(r.hat.all_t_torsion());
    CHECK(r.bar.laurent == 1);
    CHECK(r.localized_check() == 1);
    CHECK(r.holds());
  }
}

TEST_CASE("localization on free actions", "[equiv_floer]") {
  gen::Rng rng(52);
  for (int trial = 0; trial < 5; ++trial) {
    auto r = localization_map(gen::random_free_action(rng, 5));
    CHECK(r.localized_check() == 0);
    CHECK(r.localized_bar() == 0);
    CHECK(r.holds());
  }
}

TEST_CASE("localization on generated datasets", "[equiv_floer][property]") {
  gen::Rng rng(53);
  for (int trial = 0; trial < 40; ++trial) {
    EquivariantDataset e = gen::random_equivariant(rng);
    auto r = localization_map(e);
    CHECK(r.stable());
    CHECK(r.hat.all_t_torsion());
    CHECK(r.localized_hat() == 0);
    CHECK(r.localized_check() == r.localized_bar());
    CHECK(r.localized_bar() == r.twisted_rank);
  }
}

TEST_CASE("closure operations", "[equiv_floer][property]") {
  gen::Rng rng(54);
  for (int trial = 0; trial < 15; ++trial) {
    EquivariantDataset a = gen::random_motif(rng), b = gen::random_motif(rng);
    auto ra = localization_map(a), rb = localization_map(b);
    auto rs = localization_map(eq_direct_sum(a, b));
    CHECK(rs.localized_check() == ra.localized_check() + rb.localized_check());
    CHECK(rs.twisted_rank == ra.twisted_rank + rb.twisted_rank);
    if (!a.pairs.empty()) {
      auto rf = localization_map(flip_pair(a, a.pairs[0].label));
      CHECK(rf.check == ra.check);
    }
    if (!a.boundary.points.empty()) {
      auto rp = localization_map(flip_point(a, a.boundary.points[0].label));
      CHECK(rp.twisted_rank == ra.twisted_rank);
      CHECK(rp.holds());
    }
    F2Complex v = gen::random_f2_complex(rng, 2, true, 1);
    auto rt = localization_map(eq_tensor(a, v));
    CHECK(rt.twisted_rank == ra.twisted_rank * homology(v).free_rank);
    CHECK(rt.holds());
  }
}

TEST_CASE("the map G", "[equiv_floer]") {
  auto pair = map_G(point_pair_dataset());
  CHECK(pair.chain_map);
  // 1 -> 1 and iota -> 0.
  REQUIRE(pair.g0.cols() == 2);
  CHECK(pair.g0.nonzero_count() == 1);

  auto point = map_G(single_point_dataset());
  CHECK(point.chain_map);
  CHECK(point.g0.nonzero_count() == 1);

  for (int n = 0; n <= 3; ++n) CHECK(map_G(canonical_trn_equivariant(n)).chain_map);
  CHECK(map_G(diagonal_model(one_generator())).chain_map);

  EquivariantDataset broken = canonical_trn_equivariant(1);
  broken.upstairs = std::vector<UpstairsEntry>{};
  CHECK_THROWS_WITH(map_G(broken), Catch::Matchers::ContainsSubstring("coincidences"));
  EquivariantDataset irregular = canonical_trn_equivariant(1);
  irregular.equivariant_regular = false;
  CHECK_THROWS_AS(map_G(irregular), EquivariantError);
  EquivariantDataset bare = canonical_trn_equivariant(1);
  bare.upstairs.reset();
  CHECK_THROWS_AS(map_G(bare), EquivariantError);
}

TEST_CASE("G is a chain map on regular datasets", "[equiv_floer][property]") {
  gen::Rng rng(55);
  int tested = 0;
  for (int trial = 0; trial < 40; ++trial) {
    EquivariantDataset e = gen::random_equivariant(rng);
    if (!e.equivariant_regular || !e.upstairs) continue;
    ++tested;
    CHECK(map_G(e).chain_map);
  }
  CHECK(tested >= 10);
}

TEST_CASE("truncations", "[equiv_floer]") {
  for (int n = 1; n <= 3; ++n) {
    auto r = ss_truncate(canonical_trn_equivariant(2), n);
    CHECK(r.dim == static_cast<std::size_t>(n));
    REQUIRE(r.module.torsion.size() == 1);
    CHECK(r.module.torsion[0] == F2Poly::monomial(n));
  }
  CHECK_THROWS(ss_truncate(canonical_trn_equivariant(1), 0));
  for (const auto& step : truncation_tower(canonical_trn_equivariant(2), 3)) {
    CHECK(step.compatible);
    CHECK(step.rank == static_cast<std::size_t>(step.n));
  }
}

TEST_CASE("truncations match the universal coefficient count", "[equiv_floer][property]") {
  gen::Rng rng(56);
  for (int trial = 0; trial < 12; ++trial) {
    EquivariantDataset e = gen::random_equivariant(rng, 8);
    auto loc = localization_map(e);
    for (int n = 1; n <= 3; ++n) CHECK(ss_truncate(e, n).dim == uct_dim(loc.check, n));
    for (const auto& step : truncation_tower(e, 3)) {
      CHECK(step.compatible);
      CHECK(step.rank == tower_rank(loc.check, step.n));
    }
  }
}

TEST_CASE("G on truncations", "[equiv_floer]") {
  for (int n = 1; n <= 3; ++n) {
    CHECK(g_truncation(point_pair_dataset(), n).isomorphism());
    CHECK(g_truncation(single_point_dataset(), n).isomorphism());
    CHECK(g_truncation(canonical_trn_equivariant(2), n).isomorphism());
  }
  auto p = g_truncation(point_pair_dataset(), 2);
  // F2 (x)^L F2[t]/(t^2) has Tor_0 and Tor_1.
  CHECK(p.rank == 2);
  auto x = g_truncation(single_point_dataset(), 2);
  CHECK(x.rank == 2);
}

TEST_CASE("Kunneth on point factors", "[equiv_floer]") {
  F2Laurent a = parse_laurent("t^1+t^-2"), b = parse_laurent("t^3");
  CHECK(kunneth_pairing(a, b, 0) == a * b);
  auto r = kunneth_point_model(2);
  CHECK(r.unit_image == F2Laurent::monomial(2));
  CHECK(r.isomorphism);
  CHECK(r.tensor_rank == 1);
  CHECK(kunneth_point_model(-3).isomorphism);
}

TEST_CASE("Steenrod square of a point", "[equiv_floer]") {
  auto s = steenrod_square(one_generator());
  CHECK(s.holds());
  REQUIRE(s.sq_components.size() == 1);
  REQUIRE(s.sq_components[0].size() == 1);
  CHECK(s.sq_components[0].begin()->first == 0);
  CHECK(s.sq_components[0].begin()->second.get(0));
  CHECK(s.only_sq0);
  // The product model is the diagonal model of the one-generator complex.
  auto given = steenrod_square(one_generator(), diagonal_model(one_generator()));
  CHECK(given.sq == s.sq);
}

TEST_CASE("Steenrod squares on generated complexes", "[equiv_floer][property]") {
  gen::Rng rng(57);
  for (int trial = 0; trial < 12; ++trial) {
    F2Complex v = gen::random_f2_complex(rng, gen::uniform(rng, 1, 8), gen::coin(rng, 0.7), 3);
    auto s = steenrod_square(v);
    CHECK(s.cycles);
    CHECK(s.isomorphism);
    CHECK(s.twisted_rank == s.homology_dim);
    if (v.graded()) CHECK(s.degree_doubles);
    CHECK(s.degenerates_at_e2());
  }
}

TEST_CASE("rank inequality", "[equiv_floer]") {
  for (int n = 1; n <= 3; ++n) {
    auto r = smith_report(canonical_trn_equivariant(n));
    CHECK(r.twisted_rank == 1);
    CHECK(r.holds());
  }
  gen::Rng rng(58);
  auto f = smith_report(gen::random_free_action(rng, 4));
  CHECK(f.twisted_rank == 0);
  CHECK(f.holds());
  auto self = smith_report(diagonal_model(one_generator()));
  CHECK(self.equality());
  EquivariantDataset bare = canonical_trn_equivariant(1);
  bare.upstairs.reset();
  CHECK_THROWS_AS(smith_report(bare), EquivariantError);
}
