#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <vector>

#include "pcmr/pcmr.hpp"

namespace pcmr::testing {

// Distances of cities from Philadelphia (Cairo, Tokyo, Chicago,
// San Francisco, London, Montreal).
inline ComparisonMatrix table1() {
  return ComparisonMatrix::from_upper(
      6, {1.0 / 3, 8, 3, 3, 7, 9, 3, 3, 9, 1.0 / 6, 1.0 / 5, 2, 1.0 / 3, 6, 6});
}

inline ComparisonMatrix table1_a12_swapped() { return table1().with_entry({1, 2}, 3.0); }
inline ComparisonMatrix table1_a13_swapped() { return table1().with_entry({1, 3}, 1.0 / 8); }
inline ComparisonMatrix table1_a13_is_2() { return table1().with_entry({1, 3}, 2.0); }

/// 3x3 matrix [[1,a,b],[1/a,1,c],[1/b,1/c,1]].
inline ComparisonMatrix triad(double a, double b, double c) {
  return ComparisonMatrix::from_upper(3, {a, b, c});
}

inline ComparisonMatrix all_ones(int n) {
  return ComparisonMatrix::from_upper(n, std::vector<double>(upper_count(n), 1.0));
}

/// Largest real eigenvalue by Eigen's general (QR-based) solver.
inline double eigen_lambda_max(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  double best = -1e300;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i).imag()) < 1e-9)
      best = std::max(best, es.eigenvalues()(i).real());
  return best;
}

/// Random skew-symmetric upper vector with entries uniform in [-r, r].
inline std::vector<double> random_log_upper(int n, std::mt19937_64& rng, double r) {
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<double> up(static_cast<std::size_t>(upper_count(n)));
  for (double& v : up) v = u(rng);
  return up;
}

/// Consistent matrix a_ij = w_i / w_j from random positive weights.
inline ComparisonMatrix random_consistent(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 10.0);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (double& v : w) v = u(rng);
  std::vector<double> up;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) up.push_back(w[i] / w[j]);
  return ComparisonMatrix::from_upper(n, up);
}

/// Every subset of every cardinality through the convex feasibility oracle;
/// returns the feasible sets of minimal size (lexicographic) and that size.
struct BruteForce {
  int l_star = -1;
  std::vector<std::vector<Position>> sets;
};

inline BruteForce brute_force(const ComparisonMatrix& a, IndexKind kind, double alpha,
                              const ScaleBound& bound = ScaleBound(9),
                              const RandomIndexTable& ri = RandomIndexTable::saaty()) {
  const int n = a.order();
  const int m = upper_count(n);
  const auto cells = upper_positions(n);
  double aa = alpha + 1e-6;
  if (kind == IndexKind::CM && aa >= 1.0) aa = alpha;
  const double target = threshold_transform(kind, aa, n, ri);
  const LogMatrix base = to_log(a);
  std::vector<std::vector<std::vector<Position>>> by_size(static_cast<std::size_t>(m + 1));
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    BoxedProblem p{base, base.upper(), base.upper()};
    std::vector<Position> set;
    for (int s = 0; s < m; ++s)
      if (mask & (1u << s)) {
        p.lo[s] = -bound.log_bound();
        p.hi[s] = bound.log_bound();
        set.push_back(cells[s]);
      }
    if (reaches(kind, p, target).status == SolveStatus::Feasible)
      by_size[set.size()].push_back(set);
  }
  BruteForce out;
  for (int k = 0; k <= m; ++k)
    if (!by_size[k].empty()) {
      out.l_star = k;
      out.sets = by_size[k];
      std::sort(out.sets.begin(), out.sets.end());
      break;
    }
  return out;
}

}  // namespace pcmr::testing
