// Recognizing the four standard F2[t]-module patterns from finite windows.
//
// A finite window of a T-periodic complex sees F2[t], t^-1 F2[t^-1] and
// F2[t,t^-1] summands as t-torsion whose exponent grows with the window: an
// F2[t] pattern grows when the upper edge moves up, a t^-1 F2[t^-1] pattern
// when the lower edge moves down, and a Laurent pattern at both edges. Torsion
// that does not move is genuine.
#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "polarfloer/complexes.hpp"
#include "polarfloer/rings.hpp"

namespace polarfloer {

struct ElementaryParts {
  std::vector<int> t_exponents;       // t^e summands, e >= 1
  std::vector<F2Poly> other_factors;  // non-unit factors prime to t
};

inline ElementaryParts elementary_parts(const ModuleReport<F2Poly>& rep) {
  ElementaryParts out;
  for (const auto& f : rep.torsion) {
    int e = f.valuation();
    if (e > 0) out.t_exponents.push_back(e);
    F2Poly g = f.shifted_down(e);
    if (!g.is_one()) out.other_factors.push_back(g);
  }
  std::sort(out.t_exponents.begin(), out.t_exponents.end());
  std::sort(out.other_factors.begin(), out.other_factors.end());
  return out;
}

struct PatternReport {
  std::size_t polynomial = 0;     // F2[t]
  std::size_t negative = 0;       // t^-1 F2[t^-1]
  std::size_t laurent = 0;        // F2[t,t^-1]
  std::vector<int> t_torsion;     // genuine F2[t]/(t^e)
  std::vector<F2Poly> other_torsion;
  bool stable = true;             // the windows gave consistent data

  // Rank after inverting t.
  std::size_t localized_rank() const { return polynomial + laurent; }
  bool all_t_torsion() const { return polynomial == 0 && laurent == 0 && other_torsion.empty(); }
  friend bool operator==(const PatternReport&, const PatternReport&) = default;

  std::string str() const {
    std::ostringstream os;
    std::vector<std::string> parts;
    if (polynomial) parts.push_back("F2[t]^" + std::to_string(polynomial));
    if (negative) parts.push_back("(t^-1 F2[t^-1])^" + std::to_string(negative));
    if (laurent) parts.push_back("F2[t,t^-1]^" + std::to_string(laurent));
    for (int e : t_torsion) parts.push_back("F2[t]/(t^" + std::to_string(e) + ")");
    for (const auto& f : other_torsion) parts.push_back("F2[t]/(" + f.str() + ")");
    if (parts.empty()) parts.push_back("0");
    for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? " + " : "") << parts[i];
    if (!stable) os << " [window-unstable]";
    return os.str();
  }
};

namespace detail {

// Multiset difference of sorted lists.
inline std::vector<int> multiset_minus(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline long exponent_sum(const std::vector<int>& v) {
  long s = 0;
  for (int e : v) s += e;
  return s;
}

}  // namespace detail

// base = window [lo, hi], lower = [lo - 1, hi], upper = [lo, hi + 1] and far =
// [lo - k, hi + k] with k larger than every exponent of base. Exponents of
// base that survive into far are genuine; the others are window-bound.
inline PatternReport classify_windows(const ModuleReport<F2Poly>& base,
                                      const ModuleReport<F2Poly>& lower,
                                      const ModuleReport<F2Poly>& upper,
                                      const ModuleReport<F2Poly>& far) {
  auto pb = elementary_parts(base), pl = elementary_parts(lower), pu = elementary_parts(upper),
       pf = elementary_parts(far);
  std::vector<int> moving = detail::multiset_minus(pb.t_exponents, pf.t_exponents);
  std::vector<int> genuine = detail::multiset_minus(pb.t_exponents, moving);

  PatternReport out;
  out.t_torsion = genuine;
  out.other_torsion = pb.other_factors;
  out.stable = pb.other_factors == pl.other_factors && pb.other_factors == pu.other_factors &&
               pb.other_factors == pf.other_factors && base.free_rank == lower.free_rank &&
               base.free_rank == upper.free_rank && base.free_rank == far.free_rank &&
               pb.t_exponents.size() == pl.t_exponents.size() &&
               pb.t_exponents.size() == pu.t_exponents.size() &&
               pb.t_exponents.size() == pf.t_exponents.size();
  long nb = static_cast<long>(moving.size());
  long du = detail::exponent_sum(pu.t_exponents) - detail::exponent_sum(pb.t_exponents);
  long dl = detail::exponent_sum(pl.t_exponents) - detail::exponent_sum(pb.t_exponents);
  long lau = du + dl - nb;
  long pol = du - lau, neg = dl - lau;
  if (du < 0 || dl < 0 || lau < 0 || pol < 0 || neg < 0) {
    out.stable = false;
    lau = std::max(lau, 0L);
    pol = std::max(pol, 0L);
    neg = std::max(neg, 0L);
  }
  out.laurent = static_cast<std::size_t>(lau);
  out.polynomial = static_cast<std::size_t>(pol) + base.free_rank;
  out.negative = static_cast<std::size_t>(neg);
  return out;
}

using WindowReporter = std::function<ModuleReport<F2Poly>(int lo, int hi)>;

inline PatternReport classify_pattern(const WindowReporter& at, int lo, int hi) {
  ModuleReport<F2Poly> base = at(lo, hi);
  int k = 1;
  for (const auto& f : base.torsion) k = std::max(k, f.degree() + 1);
  return classify_windows(base, at(lo - 1, hi), at(lo, hi + 1), at(lo - k, hi + k));
}

// For data that only exists on [lo, hi]: the base window [lo + a, hi - b]
// shrinks until both margins can hold the far window and the four windows
// agree, largest base first. Windows on which the reporter throws are skipped. If no base fits, all
// torsion is reported as genuine and the result is marked unstable.
inline PatternReport classify_pattern_inside(const WindowReporter& at, int lo, int hi) {
  auto margin = [](const ModuleReport<F2Poly>& r) {
    int k = 1;
    for (const auto& f : r.torsion) k = std::max(k, f.degree() + 1);
    return k;
  };
  for (int total = 2; total <= hi - lo; ++total)
    for (int a = 1; a < total; ++a) {
      int b = total - a;
      try {
        ModuleReport<F2Poly> base = at(lo + a, hi - b);
        int k = margin(base);
        if (k > std::min(a, b)) continue;
        PatternReport r = classify_windows(base, at(lo + a - 1, hi - b),
                                           at(lo + a, hi - b + 1), at(lo + a - k, hi - b + k));
        if (r.stable) return r;
      } catch (const std::exception&) {
        continue;
      }
    }
  ModuleReport<F2Poly> full = at(lo, hi);
  PatternReport out = classify_windows(full, full, full, full);
  out.stable = false;
  return out;
}

}  // namespace polarfloer
