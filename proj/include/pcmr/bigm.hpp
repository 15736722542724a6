#pragma once

// Big-M mixed 0-1 formulation, solved by branch-and-bound on y.
//
//   min  sum y_ij                       (threshold mode)
//   s.t. phi(exp X) <= alpha*
//        -M <= x_ij <= M
//        -2M y_ij <= x_ij - a_ij <= 2M y_ij,   y_ij in {0, 1}
//
// and the budget variant min alpha s.t. sum y_ij <= K. All optima of the
// threshold program are listed with the cut loop
//
//   sum y_ij = L*                       fixes the optimal cardinality
//   sum_{(i,j) in I0} y_ij >= 1         excludes a found pattern (I0 = its zeros)
//
// re-solving until infeasible. This is deliberately a different search from
// reduce.hpp and serves as its cross-check.
//
// Relaxations: for CM the continuous relaxation is an LP and is solved as
// such (y in [0, 1], cuts included). For CR and CI a node is bounded by the
// box relaxation: every undecided cell free in [-M, M], which contains the
// x-projection of the continuous relaxation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "pcmr/convex.hpp"
#include "pcmr/reduce.hpp"
#include "pcmr/simplex.hpp"

namespace pcmr {

struct BigMOptions {
  std::uint64_t node_limit = 1000000;
  double accept_tol = 1e-6;
  SolveOptions solver{};
};

namespace detail {

class BigMSearch {
 public:
  BigMSearch(const ReductionQuery& q, const BigMOptions& o)
      : q_(q),
        o_(o),
        n_(q.matrix.order()),
        m_(upper_count(n_)),
        base_(to_log(q.matrix)),
        mbar_(q.bound.log_bound()) {}

  // --- threshold mode ------------------------------------------------------

  ReductionResult min_d(double alpha) {
    ReduceOptions ro;
    ro.accept_tol = o_.accept_tol;
    target_ = acceptance_target(q_, alpha, ro);

    ReductionResult res;
    res.kind = q_.kind;
    res.mode = q_.mode;
    res.enumerated = true;
    res.initial_value = index_value(q_.kind, q_.matrix, q_.ri);

    // optimal cardinality
    best_count_ = m_ + 1;
    std::vector<int> y(static_cast<std::size_t>(m_), kFree);
    minimize_count(y);
    if (best_count_ > m_)
      throw Error(ErrorCode::ConvergenceFailure, "Big-M program has no feasible point");
    const int l_star = best_count_;

    // cut loop
    std::vector<std::vector<int>> found;
    for (;;) {
      std::vector<int> yy(static_cast<std::size_t>(m_), kFree);
      std::optional<std::vector<int>> hit = find_pattern(yy, l_star);
      if (!hit) break;
      cuts_.push_back(zeros_of(*hit));
      found.push_back(*hit);
    }
    std::vector<std::vector<int>> sets;
    for (const auto& pattern : found) sets.push_back(ones_of(pattern));
    std::sort(sets.begin(), sets.end());

    ReduceOptions wo;
    wo.accept_tol = o_.accept_tol;
    for (const auto& s : sets) {
      const auto r = reaches(q_.kind, freed_box(base_, s, q_.bound), target_, o_.solver);
      res.solutions.push_back(make_witness(q_, s, r, wo, alpha));
    }
    res.l_star = l_star;
    res.stats.subproblems = relaxations_;
    res.stats.solver_limits = solver_limits_;
    return res;
  }

  // --- budget mode ---------------------------------------------------------

  ReductionResult min_alpha(int budget) {
    ReductionResult res;
    res.kind = q_.kind;
    res.mode = q_.mode;
    res.initial_value = index_value(q_.kind, q_.matrix, q_.ri);
    budget_ = std::min(budget, m_);
    best_value_ = std::numeric_limits<double>::infinity();
    std::vector<int> y(static_cast<std::size_t>(m_), kFree);
    minimize_value(y);
    ReduceOptions wo;
    wo.accept_tol = o_.accept_tol;
    res.solutions.push_back(make_witness(q_, best_set_, best_report_, wo, std::nullopt));
    res.alpha_opt = res.solutions.front().value;
    res.stats.subproblems = relaxations_;
    res.stats.solver_limits = solver_limits_;
    return res;
  }

 private:
  static constexpr int kFree = -1;

  static std::vector<int> ones_of(const std::vector<int>& y) {
    std::vector<int> out;
    for (std::size_t s = 0; s < y.size(); ++s)
      if (y[s] == 1) out.push_back(static_cast<int>(s));
    return out;
  }
  static std::vector<int> zeros_of(const std::vector<int>& y) {
    std::vector<int> out;
    for (std::size_t s = 0; s < y.size(); ++s)
      if (y[s] != 1) out.push_back(static_cast<int>(s));
    return out;
  }
  static std::vector<int> open_of(const std::vector<int>& y) {
    std::vector<int> out;
    for (std::size_t s = 0; s < y.size(); ++s)
      if (y[s] != 0) out.push_back(static_cast<int>(s));
    return out;
  }
  static int count(const std::vector<int>& y, int v) {
    return static_cast<int>(std::count(y.begin(), y.end(), v));
  }

  void visit() {
    if (++nodes_ > o_.node_limit)
      throw Error(ErrorCode::BranchLimit,
                  "branch-and-bound exceeded " + std::to_string(o_.node_limit) + " nodes");
  }

  SolveReport solve_target(const std::vector<int>& freed) {
    ++relaxations_;
    auto r = reaches(q_.kind, freed_box(base_, freed, q_.bound), target_, o_.solver);
    if (r.status == SolveStatus::IterationLimit) ++solver_limits_;
    return r;
  }

  SolveReport solve_min(const std::vector<int>& freed) {
    ++relaxations_;
    auto r = minimize(q_.kind, freed_box(base_, freed, q_.bound), o_.solver);
    if (r.status == SolveStatus::IterationLimit) ++solver_limits_;
    return r;
  }

  int first_free(const std::vector<int>& y) const {
    for (int s = 0; s < m_; ++s)
      if (y[s] == kFree) return s;
    return -1;
  }

  /// CM continuous relaxation of the node. Threshold mode: minimum of
  /// sum y over the undecided cells (nullopt if infeasible), with the
  /// cardinality row sum y = cardinality and the cuts when given.
  /// Budget mode (cardinality < 0 and budget_ set): minimum of max |s|.
  std::optional<double> cm_relaxation(const std::vector<int>& y, bool threshold,
                                      int cardinality) {
    ++relaxations_;
    std::vector<int> xs, ys;
    for (int s = 0; s < m_; ++s) {
      if (y[s] != 0) xs.push_back(s);
      if (y[s] == kFree) ys.push_back(s);
    }
    const std::size_t nx = xs.size(), ny = ys.size();
    const std::size_t nv = nx + ny + (threshold ? 0 : 1);  // + t in budget mode
    std::vector<int> xvar(static_cast<std::size_t>(m_), -1);
    for (std::size_t v = 0; v < nx; ++v) xvar[xs[v]] = static_cast<int>(v);

    std::vector<std::vector<double>> a;
    std::vector<double> b;
    const auto upper = base_.upper();
    for (const auto& c : triad_cells(n_)) {
      std::vector<double> row(nv, 0.0);
      double constant = 0.0;
      auto add = [&](int cell, double coef) {
        if (xvar[cell] >= 0) row[static_cast<std::size_t>(xvar[cell])] += coef;
        else constant += coef * upper[cell];
      };
      add(c.ij, 1.0);
      add(c.jk, 1.0);
      add(c.ik, -1.0);
      std::vector<double> neg(nv);
      for (std::size_t k = 0; k < nv; ++k) neg[k] = -row[k];
      if (threshold) {
        a.push_back(row);
        b.push_back(target_ - constant);
        a.push_back(neg);
        b.push_back(target_ + constant);
      } else {
        row[nv - 1] = -1.0;
        neg[nv - 1] = -1.0;
        a.push_back(row);
        b.push_back(-constant);
        a.push_back(neg);
        b.push_back(constant);
      }
    }
    // -2M y <= x - a <= 2M y on undecided cells
    for (std::size_t u = 0; u < ny; ++u) {
      const int cell = ys[u];
      std::vector<double> r1(nv, 0.0), r2(nv, 0.0);
      r1[static_cast<std::size_t>(xvar[cell])] = 1.0;
      r1[nx + u] = -2.0 * mbar_;
      r2[static_cast<std::size_t>(xvar[cell])] = -1.0;
      r2[nx + u] = -2.0 * mbar_;
      a.push_back(r1);
      b.push_back(upper[cell]);
      a.push_back(r2);
      b.push_back(-upper[cell]);
    }
    const int ones = count(y, 1);
    if (threshold && cardinality >= 0) {
      std::vector<double> r(nv, 0.0);
      for (std::size_t u = 0; u < ny; ++u) r[nx + u] = 1.0;
      a.push_back(r);
      b.push_back(cardinality - ones);
      for (auto& v : r) v = -v;
      a.push_back(r);
      b.push_back(-(cardinality - ones));
      for (const auto& cut : cuts_) {
        std::vector<double> cr(nv, 0.0);
        bool met = false;
        for (int cell : cut) {
          if (y[cell] == 1) met = true;
          if (y[cell] == kFree)
            cr[nx + static_cast<std::size_t>(std::find(ys.begin(), ys.end(), cell) - ys.begin())] = -1.0;
        }
        if (met) continue;
        a.push_back(cr);
        b.push_back(-1.0);
      }
    }
    if (!threshold) {
      std::vector<double> r(nv, 0.0);
      for (std::size_t u = 0; u < ny; ++u) r[nx + u] = 1.0;
      a.push_back(r);
      b.push_back(budget_ - ones);
    }
    std::vector<double> c(nv, 0.0), lo(nv), hi(nv);
    for (std::size_t v = 0; v < nx; ++v) {
      lo[v] = -mbar_;
      hi[v] = mbar_;
    }
    for (std::size_t u = 0; u < ny; ++u) {
      lo[nx + u] = 0.0;
      hi[nx + u] = 1.0;
      if (threshold) c[nx + u] = 1.0;
    }
    if (!threshold) {
      double reach = mbar_;
      for (double v : upper) reach = std::max(reach, std::abs(v));
      lo[nv - 1] = 0.0;
      hi[nv - 1] = 3.0 * reach + 1.0;
      c[nv - 1] = 1.0;
    }
    const auto r = lp::minimize_boxed(a, b, c, lo, hi);
    if (r.status != lp::Status::Optimal) return std::nullopt;
    return r.objective;
  }

  bool cuts_satisfied(const std::vector<int>& y) const {
    for (const auto& cut : cuts_) {
      bool met = false;
      for (int cell : cut) met = met || y[cell] == 1;
      if (!met) return false;
    }
    return true;
  }

  bool cut_dead(const std::vector<int>& y) const {
    for (const auto& cut : cuts_) {
      bool alive = false;
      for (int cell : cut) alive = alive || y[cell] != 0;
      if (!alive) return true;
    }
    return false;
  }

  /// Branch-and-bound for the optimal cardinality.
  void minimize_count(std::vector<int>& y) {
    visit();
    const int ones = count(y, 1);
    if (ones >= best_count_) return;
    int bound = ones;
    if (q_.kind == IndexKind::CM) {
      const auto lp = cm_relaxation(y, true, -1);
      if (!lp) return;
      bound = ones + static_cast<int>(std::ceil(*lp - 1e-9));
      if (bound >= best_count_) return;
    } else if (solve_target(open_of(y)).status == SolveStatus::Infeasible) {
      return;
    }
    if (solve_target(ones_of(y)).status == SolveStatus::Feasible) {
      best_count_ = ones;  // undecided cells all zero
      return;
    }
    bound = std::max(bound, ones + 1);
    if (bound >= best_count_) return;
    const int s = first_free(y);
    if (s < 0) return;
    y[s] = 1;
    minimize_count(y);
    y[s] = 0;
    minimize_count(y);
    y[s] = kFree;
  }

  /// A pattern with exactly `card` ones that satisfies every cut and is
  /// feasible, or nullopt.
  std::optional<std::vector<int>> find_pattern(std::vector<int>& y, int card) {
    visit();
    const int ones = count(y, 1);
    const int open = count(y, kFree);
    if (ones > card || ones + open < card || cut_dead(y)) return std::nullopt;
    if (q_.kind == IndexKind::CM) {
      if (!cm_relaxation(y, true, card)) return std::nullopt;
    } else if (solve_target(open_of(y)).status == SolveStatus::Infeasible) {
      return std::nullopt;
    }
    if (ones == card) {
      auto leaf = y;
      for (auto& v : leaf)
        if (v == kFree) v = 0;
      if (!cuts_satisfied(leaf)) return std::nullopt;
      if (solve_target(ones_of(leaf)).status != SolveStatus::Feasible) return std::nullopt;
      return leaf;
    }
    const int s = first_free(y);
    for (int v : {1, 0}) {
      y[s] = v;
      auto hit = find_pattern(y, card);
      y[s] = kFree;
      if (hit) return hit;
    }
    return std::nullopt;
  }

  /// Branch-and-bound for the budget program.
  void minimize_value(std::vector<int>& y) {
    visit();
    const int ones = count(y, 1);
    const int open = count(y, kFree);
    const bool leaf = ones + open <= budget_ || ones == budget_;
    if (leaf) {
      std::vector<int> freed = ones == budget_ ? ones_of(y) : open_of(y);
      const auto r = solve_min(freed);
      if (r.objective < best_value_) {
        best_value_ = r.objective;
        best_set_ = freed;
        best_report_ = r;
      }
      return;
    }
    double bound;
    if (q_.kind == IndexKind::CM) {
      const auto lp = cm_relaxation(y, false, -1);
      bound = lp ? *lp : std::numeric_limits<double>::infinity();
    } else {
      bound = solve_min(open_of(y)).objective;
    }
    if (bound >= best_value_ - 1e-12) return;
    const int s = first_free(y);
    for (int v : {1, 0}) {
      y[s] = v;
      minimize_value(y);
    }
    y[s] = kFree;
  }

  const ReductionQuery& q_;
  BigMOptions o_;
  int n_;
  int m_;
  LogMatrix base_;
  double mbar_;
  double target_ = 0.0;
  int budget_ = 0;

  std::vector<std::vector<int>> cuts_;
  int best_count_ = 0;
  double best_value_ = 0.0;
  std::vector<int> best_set_;
  SolveReport best_report_;
  std::uint64_t nodes_ = 0;
  std::uint64_t relaxations_ = 0;
  int solver_limits_ = 0;
};

}  // namespace detail

/// Solves the query through the monolithic Big-M program. Threshold mode
/// returns every optimal pattern (cut loop); budget mode returns one argmin.
inline ReductionResult bigm_oracle(const ReductionQuery& q, const BigMOptions& o = {}) {
  const auto t0 = detail::Clock::now();
  detail::check_query(q);
  detail::BigMSearch search(q, o);
  ReductionResult res = std::holds_alternative<MinChanges>(q.mode)
                            ? search.min_d(std::get<MinChanges>(q.mode).alpha)
                            : search.min_alpha(std::get<MinIndex>(q.mode).budget);
  res.stats.wall_seconds = detail::seconds_since(t0);
  return res;
}

}  // namespace pcmr
