// Independent reference computations used to check the library. These are
// deliberately naive: brute force, cofactor expansion, dimension counting.
#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "polarfloer/matrix.hpp"
#include "polarfloer/rings.hpp"

namespace oracle {

using polarfloer::F2Poly;
using polarfloer::Gf2;
using polarfloer::RingMatrix;

// Rank over GF(2) by elimination on plain integer rows.
inline std::size_t rank_f2(std::vector<std::vector<int>> rows) {
  std::size_t rank = 0;
  std::size_t cols = rows.empty() ? 0 : rows[0].size();
  for (std::size_t c = 0; c < cols; ++c) {
    std::size_t p = rank;
    while (p < rows.size() && rows[p][c] % 2 == 0) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[rank]);
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (i != rank && rows[i][c] % 2)
        for (std::size_t j = 0; j < cols; ++j) rows[i][j] = (rows[i][j] + rows[rank][j]) % 2;
    ++rank;
  }
  return rank;
}

inline std::size_t rank_f2(const polarfloer::F2Matrix& m) {
  std::vector<std::vector<int>> rows(m.rows(), std::vector<int>(m.cols(), 0));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j).v ? 1 : 0;
  return rank_f2(rows);
}

// Determinant by cofactor expansion; in characteristic 2 signs vanish.
inline F2Poly det(const RingMatrix<F2Poly>& m) {
  std::size_t n = m.rows();
  if (n == 0) return F2Poly::one();
  if (n == 1) return m(0, 0);
  F2Poly acc;
  for (std::size_t j = 0; j < n; ++j) {
    if (m(0, j).is_zero()) continue;
    std::vector<std::size_t> rs, cs;
    for (std::size_t i = 1; i < n; ++i) rs.push_back(i);
    for (std::size_t c = 0; c < n; ++c)
      if (c != j) cs.push_back(c);
    acc += m(0, j) * det(m.submatrix(rs, cs));
  }
  return acc;
}

inline void for_each_subset(std::size_t n, std::size_t k,
                            const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (cur.size() == k) {
      f(cur);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
}

// Determinantal divisors: gcd of all k x k minors, k = 1 .. min(rows, cols).
inline std::vector<F2Poly> determinantal_divisors(const RingMatrix<F2Poly>& m) {
  std::vector<F2Poly> out;
  std::size_t kmax = std::min(m.rows(), m.cols());
  for (std::size_t k = 1; k <= kmax; ++k) {
    F2Poly g;
    for_each_subset(m.rows(), k, [&](const std::vector<std::size_t>& rs) {
      for_each_subset(m.cols(), k, [&](const std::vector<std::size_t>& cs) {
        g = gcd(g, det(m.submatrix(rs, cs)));
      });
    });
    out.push_back(g);
  }
  return out;
}

inline F2Poly random_poly(std::mt19937_64& rng, int max_degree) {
  std::uint64_t mask = (std::uint64_t{1} << (max_degree + 1)) - 1;
  return F2Poly::from_word(rng() & mask);
}

inline RingMatrix<F2Poly> random_poly_matrix(std::mt19937_64& rng, std::size_t rows,
                                             std::size_t cols, int max_degree, double density) {
  std::bernoulli_distribution keep(density);
  RingMatrix<F2Poly> m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (keep(rng)) m(i, j) = random_poly(rng, max_degree);
  return m;
}

inline polarfloer::F2Matrix random_f2_matrix(std::mt19937_64& rng, std::size_t rows,
                                             std::size_t cols, double density) {
  std::bernoulli_distribution keep(density);
  polarfloer::F2Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = Gf2(keep(rng));
  return m;
}

// Dimension of ker/im of an F2 differential by rank counting.
inline std::size_t f2_homology_dim(const polarfloer::F2Matrix& d) {
  return d.cols() - 2 * rank_f2(d);
}

}  // namespace oracle
