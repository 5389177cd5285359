#include <catch_amalgamated.hpp>

#include "polarfloer/equiv_floer.hpp"
#include "polarfloer/twisted.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace polarfloer;

namespace {

TwistedPoint pt(const std::string& l, int index, std::optional<int> s = std::nullopt) {
  return {l, index, std::nullopt, s};
}

TwistedClass cls(const std::string& l, const std::string& from, const std::string& to, int sf,
                 bool pos, bool neg = false) {
  return {l, from, to, sf, pos, neg, std::nullopt, std::nullopt};
}

TwistedDataset single_point() {
  TwistedDataset tw;
  tw.points = {pt("x", 0)};
  return tw;
}

TwistedDataset two_points(int sf, bool pos, bool neg) {
  TwistedDataset tw;
  tw.points = {pt("p", 0), pt("q", 1)};
  tw.classes = {cls("u", "p", "q", sf, pos, neg)};
  return tw;
}

}  // namespace

TEST_CASE("twisted homology of small datasets", "[twisted]") {
  auto h = twisted_homology(build_twisted(single_point()));
  CHECK(h.free_rank == 1);
  CHECK(h.torsion.empty());

  auto acyclic = twisted_homology(build_twisted(two_points(0, true, false)));
  CHECK(acyclic.is_zero());

  TwistedDataset both = two_points(0, false, false);
  both.classes = {cls("u", "p", "q", 0, true), cls("v", "p", "q", 0, true)};
  auto cancel = twisted_homology(build_twisted(both));
  CHECK(cancel.free_rank == 2);
}

TEST_CASE("dataset contracts", "[twisted]") {
  TwistedDataset dup = single_point();
  dup.points.push_back(pt("x", 1));
  CHECK_THROWS_AS(validate_twisted(dup), TwistedError);

  TwistedDataset down = two_points(0, true, false);
  down.classes[0].source = "q";
  down.classes[0].target = "p";
  CHECK_THROWS_AS(validate_twisted(down), TwistedError);

  TwistedDataset shift = two_points(0, true, false);
  shift.classes[0].shift = 3;
  CHECK_THROWS_WITH(validate_twisted(shift), Catch::Matchers::ContainsSubstring("not admissible"));

  TwistedDataset periodic = two_points(0, true, false);
  TwistedClass again = periodic.classes[0];
  again.at = 1;
  again.neg = true;
  periodic.classes.push_back(again);
  CHECK_THROWS_WITH(validate_twisted(periodic), Catch::Matchers::ContainsSubstring("T-equivariant"));

  TwistedDataset action = two_points(0, true, false);
  action.points[0].action = Rational(2);
  action.points[1].action = Rational(1);
  CHECK_THROWS_AS(validate_twisted(action), TwistedError);

  TwistedDataset grading = two_points(1, true, false);
  grading.points[0].s = 0;
  grading.points[1].s = 0;
  CHECK_THROWS_AS(validate_twisted(grading), TwistedError);
}

TEST_CASE("local system is additive on compositions", "[twisted]") {
  TwistedDataset tw;
  tw.points = {pt("a", 0), pt("b", 1), pt("c", 2)};
  tw.classes = {cls("u", "a", "b", 1, true), cls("v", "b", "c", 2, true),
                cls("w", "a", "c", 3, false)};
  tw.compositions = {{"u", "v", "w"}};
  CHECK_NOTHROW(validate_twisted(tw));
  tw.classes[2].sf = 2;
  CHECK_THROWS_WITH(validate_twisted(tw), Catch::Matchers::ContainsSubstring("additive"));
}

TEST_CASE("T is invertible", "[twisted]") {
  CHECK(verify_T_invertible(build_twisted(single_point())).holds());
  for (int n = 1; n <= 3; ++n)
    CHECK(verify_T_invertible(build_twisted(canonical_trn_equivariant(n).boundary)).holds());
  // No negative counts: T is the ladder alone.
  TwistedDataset pos_only = two_points(0, true, false);
  auto tc = build_twisted(pos_only);
  CHECK(tc.T == LaurentMatrix::scalar(2, F2Laurent::monomial(1)));
  CHECK(verify_T_invertible(tc).holds());
}

TEST_CASE("constant trajectories give the ladder", "[twisted]") {
  TwistedModel m = validate_twisted(single_point());
  TwistedWindow w = twisted_window(m, -3, 3);
  CHECK(w.tcomplex.c.d().is_zero());
  std::size_t n = w.generators.size();
  REQUIRE(n == 7);
  for (std::size_t j = 0; j + 1 < n; ++j) CHECK(w.tcomplex.T(j + 1, j).v);
  CHECK(w.tcomplex.T.nonzero_count() == n - 1);
}

TEST_CASE("E2 page", "[twisted]") {
  TwistedDataset zero_sf = two_points(0, true, false);
  zero_sf.points.push_back(pt("r", 0));
  auto e2 = e2_page(zero_sf);
  CHECK(e2.free_rank == 1);

  auto sf1 = e2_page(two_points(1, true, false));
  CHECK(sf1.is_zero());

  TwistedDataset none;
  none.points = {pt("a", 0), pt("b", 2), pt("c", 5)};
  CHECK(e2_page(none).free_rank == 3);
}

TEST_CASE("Porteous coefficient", "[twisted]") {
  for (int n = 1; n <= 6; ++n) {
    CHECK_FALSE(porteous_coefficient(F2Poly::one(), n, Gf2(true)).v);
    CHECK(porteous_coefficient(parse_poly("1+t"), n, Gf2(true)).v);
    CHECK_FALSE(porteous_coefficient(parse_poly("1+t"), n, Gf2(false)).v);
  }
  CHECK_FALSE(porteous_coefficient(parse_poly("1+t+t^2"), 2, Gf2(true)).v);
  CHECK_THROWS(porteous_coefficient(parse_poly("t"), 2, Gf2(true)));
}

TEST_CASE("Porteous dichotomy", "[twisted]") {
  for (int n = 1; n <= 6; ++n) {
    CHECK(two_point_twisted(n, Gf2(true)).is_zero());
    auto r = two_point_twisted(n, Gf2(false));
    CHECK(r.free_rank == 2);
    CHECK(r.torsion.empty());
  }
}

TEST_CASE("series inverse multiplies back", "[twisted][property]") {
  gen::Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    F2Poly p = oracle::random_poly(rng, 6);
    if (!p.coeff(0)) p += F2Poly::one();
    int order = gen::uniform(rng, 0, 32);
    F2Poly prod = (p * laurent_inverse_series(p, order)).truncated(order + 1);
    CHECK(prod == F2Poly::one());
  }
}

TEST_CASE("spectral sequence and windows on generated datasets", "[twisted][property]") {
  gen::Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    TwistedDataset tw = gen::random_twisted(rng);
    TwistedComplex tc = build_twisted(tw);
    auto sp = twisted_spectral_pages(tc, 2);
    REQUIRE(sp.pages.size() == 2);
    CHECK(sp.pages[1] == e2_page(tw));
    CHECK(sp.e_infinity.free_rank == twisted_homology(tc).free_rank);
    CHECK(verify_T_invertible(tc).holds());
    CHECK(window_stability(tc, tw.window).holds());
  }
}
