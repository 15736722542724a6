#pragma once

// Dense two-phase tableau simplex for small LPs
//
//     maximize  c'x   subject to  A x <= b,  x >= 0
//
// with Bland's rule throughout, so it terminates on degenerate problems
// (the triad LPs are highly degenerate: many triads tie at the optimum).
// Phase one uses a single auxiliary variable x0 added to every row.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pcmr::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  int pivots = 0;
  double primal_violation = 0.0;  // max_i (A x - b)_i, clipped at 0
};

class Simplex {
 public:
  using Row = std::vector<double>;

  Simplex(const std::vector<Row>& a, const Row& b, const Row& c,
          double eps = 1e-11)
      : m_(static_cast<int>(b.size())),
        n_(static_cast<int>(c.size())),
        eps_(eps),
        a_(a),
        b_(b),
        nonbasic_(static_cast<std::size_t>(n_ + 1)),
        basic_(static_cast<std::size_t>(m_)),
        d_(static_cast<std::size_t>(m_ + 2), Row(static_cast<std::size_t>(n_ + 2), 0.0)) {
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) at(i, j) = a[i][j];
      at(i, n_) = -1.0;  // auxiliary x0
      at(i, n_ + 1) = b[i];
      basic_[i] = n_ + i;  // slack ids n..n+m-1
    }
    for (int j = 0; j < n_; ++j) {
      nonbasic_[j] = j;
      at(m_, j) = -c[j];
    }
    nonbasic_[n_] = kAux;
    at(m_ + 1, n_) = 1.0;  // phase one: maximize -x0
  }

  Result solve() {
    Result res;
    int r = 0;
    for (int i = 1; i < m_; ++i)
      if (at(i, n_ + 1) < at(r, n_ + 1)) r = i;
    if (m_ > 0 && at(r, n_ + 1) < -eps_) {
      pivot(r, n_, res.pivots);
      if (!run(2, res.pivots) || at(m_ + 1, n_ + 1) < -eps_) {
        res.status = Status::Infeasible;
        return res;
      }
      // x0 may still be basic at level zero; pivot it out
      for (int i = 0; i < m_; ++i) {
        if (basic_[i] != kAux) continue;
        int s = -1;
        for (int j = 0; j < n_ + 1; ++j)
          if (std::abs(at(i, j)) > eps_ &&
              (s == -1 || std::abs(at(i, j)) > std::abs(at(i, s))))
            s = j;
        if (s != -1) pivot(i, s, res.pivots);
      }
    }
    const bool bounded = run(1, res.pivots);
    res.x.assign(static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < m_; ++i)
      if (basic_[i] >= 0 && basic_[i] < n_) res.x[basic_[i]] = at(i, n_ + 1);
    if (!bounded) {
      res.status = Status::Unbounded;
      res.objective = std::numeric_limits<double>::infinity();
      return res;
    }
    res.status = Status::Optimal;
    res.objective = at(m_, n_ + 1);
    for (int i = 0; i < m_; ++i) {
      double lhs = 0.0;
      for (int j = 0; j < n_; ++j) lhs += a_[i][j] * res.x[j];
      res.primal_violation = std::max(res.primal_violation, lhs - b_[i]);
    }
    return res;
  }

 private:
  static constexpr int kAux = -1;

  double& at(int i, int j) { return d_[i][j]; }

  void pivot(int r, int s, int& count) {
    ++count;
    const double inv = 1.0 / at(r, s);
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r || std::abs(at(i, s)) <= eps_) continue;
      const double f = at(i, s) * inv;
      for (int j = 0; j < n_ + 2; ++j) at(i, j) -= at(r, j) * f;
      at(i, s) = at(r, s) * f;
    }
    for (int j = 0; j < n_ + 2; ++j)
      if (j != s) at(r, j) *= inv;
    for (int i = 0; i < m_ + 2; ++i)
      if (i != r) at(i, s) *= -inv;
    at(r, s) = inv;
    std::swap(basic_[r], nonbasic_[s]);
  }

  // Bland's rule: entering = lowest id with negative reduced cost,
  // leaving = min ratio, ties to lowest basic id.
  bool run(int phase, int& count) {
    const int obj = m_ + phase - 1;
    for (;;) {
      int s = -1;
      for (int j = 0; j < n_ + 1; ++j) {
        if (phase == 1 && nonbasic_[j] == kAux) continue;
        if (at(obj, j) < -eps_ && (s == -1 || nonbasic_[j] < nonbasic_[s])) s = j;
      }
      if (s == -1) return true;
      int r = -1;
      double best = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (at(i, s) <= eps_) continue;
        const double ratio = at(i, n_ + 1) / at(i, s);
        if (r == -1 || ratio < best - eps_ ||
            (ratio <= best + eps_ && basic_[i] < basic_[r])) {
          r = i;
          best = ratio;
        }
      }
      if (r == -1) return false;
      pivot(r, s, count);
    }
  }

  int m_;
  int n_;
  double eps_;
  std::vector<Row> a_;
  Row b_;
  std::vector<int> nonbasic_;
  std::vector<int> basic_;
  std::vector<Row> d_;
};

/// maximize c'x subject to A x <= b, x >= 0.
inline Result maximize(const std::vector<std::vector<double>>& a,
                       const std::vector<double>& b, const std::vector<double>& c) {
  return Simplex(a, b, c).solve();
}

/// minimize c'x subject to A x <= b, lo <= x <= hi (finite bounds).
inline Result minimize_boxed(std::vector<std::vector<double>> a,
                             std::vector<double> b, const std::vector<double>& c,
                             const std::vector<double>& lo,
                             const std::vector<double>& hi) {
  const std::size_t n = c.size();
  // x = lo + u, 0 <= u <= hi - lo
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < n; ++j) b[i] -= a[i][j] * lo[j];
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> row(n, 0.0);
    row[j] = 1.0;
    a.push_back(std::move(row));
    b.push_back(hi[j] - lo[j]);
  }
  std::vector<double> neg(c.size());
  double offset = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    neg[j] = -c[j];
    offset += c[j] * lo[j];
  }
  Result r = maximize(a, b, neg);
  if (r.status != Status::Optimal) return r;
  r.objective = -r.objective + offset;
  for (std::size_t j = 0; j < n; ++j) r.x[j] += lo[j];
  return r;
}

}  // namespace pcmr::lp
