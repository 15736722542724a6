#pragma once

// Minimal-modification repairs.
//
//   min_changes        smallest L such that freeing some L upper cells lets
//                      the index reach the threshold; one witness
//   enumerate_optimal  every L*-subset that works, one witness each
//   min_index          lowest index reachable by freeing at most K cells
//
// The binary pattern is searched explicitly: cardinality levels k = 0, 1, ...
// and, within a level, subsets in lexicographic order of their (row-major)
// cell positions. Each pattern is one convex subproblem (see convex.hpp).
// Freeing more cells never makes a subproblem worse, which is why min_index
// only needs subsets of size exactly min(K, m).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "pcmr/convex.hpp"
#include "pcmr/indices.hpp"
#include "pcmr/pcm.hpp"

namespace pcmr {

struct MinChanges {
  double alpha = 0.1;
};

struct MinIndex {
  int budget = 1;
};

using ReductionMode = std::variant<MinChanges, MinIndex>;

struct ReductionQuery {
  ComparisonMatrix matrix;
  IndexKind kind = IndexKind::CR;
  ReductionMode mode = MinChanges{};
  ScaleBound bound{};
  RandomIndexTable ri = RandomIndexTable::saaty();
};

struct ReduceOptions {
  /// Acceptance slack in index units: phi <= alpha + accept_tol passes.
  double accept_tol = 1e-6;
  SolveOptions solver{};
  bool round_to_scale = false;
  /// Cap on the number of subproblems; 0 means no cap.
  std::uint64_t work_budget = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  unsigned threads = 1;
};

struct Witness {
  std::vector<Position> positions;  // the freed cells
  std::vector<Position> changed{};  // cells that actually differ from the input
  ComparisonMatrix matrix;
  double value = 0.0;      // index value of `matrix`
  double objective = 0.0;  // log-space objective at the witness
  SolveStatus status = SolveStatus::Optimal;
  // Saaty-rounded presentation copy, when requested
  std::optional<ComparisonMatrix> rounded{};
  double rounded_value = 0.0;
  std::optional<bool> rounded_acceptable{};
};

struct ReductionStats {
  std::uint64_t subproblems = 0;
  double wall_seconds = 0.0;
  int solver_limits = 0;  // subproblems that stopped on the iteration cap
  /// MinIndex: other sets attaining the optimum, in lexicographic order.
  std::vector<std::vector<Position>> ties;
};

struct ReductionResult {
  IndexKind kind = IndexKind::CR;
  ReductionMode mode = MinChanges{};
  bool enumerated = false;
  double initial_value = 0.0;
  int l_star = 0;          // MinChanges
  double alpha_opt = 0.0;  // MinIndex
  std::vector<Witness> solutions;
  ReductionStats stats;

  std::vector<std::vector<Position>> sets() const {
    std::vector<std::vector<Position>> out;
    for (const auto& w : solutions) out.push_back(w.positions);
    return out;
  }
};

/// Deadline passed; carries what was done so far.
class ReductionTimeout : public Error {
 public:
  explicit ReductionTimeout(ReductionStats stats)
      : Error(ErrorCode::Timeout, "reduction exceeded its time limit"),
        stats_(std::move(stats)) {}
  const ReductionStats& stats() const noexcept { return stats_; }

 private:
  ReductionStats stats_;
};

/// Work budget exceeded; `estimate` is the subproblem count that would have
/// been needed to finish the current cardinality level.
class WorkBudgetError : public Error {
 public:
  WorkBudgetError(std::uint64_t estimate, std::uint64_t budget)
      : Error(ErrorCode::WorkBudgetExceeded,
              "request needs " + std::to_string(estimate) +
                  " subproblems, budget is " + std::to_string(budget)),
        estimate_(estimate) {}
  std::uint64_t estimate() const noexcept { return estimate_; }

 private:
  std::uint64_t estimate_;
};

/// C(m, k), saturating at UINT64_MAX.
inline std::uint64_t choose(int m, int k) {
  if (k < 0 || k > m) return 0;
  k = std::min(k, m - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(m - k + i);
    if (r > std::numeric_limits<std::uint64_t>::max() / num)
      return std::numeric_limits<std::uint64_t>::max();
    r = r * num / static_cast<std::uint64_t>(i);
  }
  return r;
}

inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b
             ? std::numeric_limits<std::uint64_t>::max()
             : a + b;
}

/// All k-subsets of {0..m-1}, lexicographic.
inline std::vector<std::vector<int>> combinations(int m, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > m) return out;
  std::vector<int> c(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) c[i] = i;
  for (;;) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[i] == m - k + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

/// Nearest 17-point scale value in log distance, restricted to the bound.
inline double round_to_scale(double a, const ScaleBound& bound) {
  double best = 1.0;
  double gap = std::abs(std::log(a));
  for (double s : saaty_scale()) {
    if (!bound.admits(s)) continue;
    const double d = std::abs(std::log(a) - std::log(s));
    if (d < gap - 1e-15) {
      gap = d;
      best = s;
    }
  }
  return best;
}

namespace detail {

inline void check_query(const ReductionQuery& q) {
  const int n = q.matrix.order();
  for (const auto& p : upper_positions(n))
    if (!q.bound.admits(q.matrix.at(p)))
      throw Error(ErrorCode::InadmissibleQuery,
                  "entry " + to_string(p) + " lies outside [1/M, M]", p.i, p.j);
  if (q.kind == IndexKind::CR) q.ri.at(n);
  if (const auto* b = std::get_if<MinIndex>(&q.mode)) {
    if (b->budget < 0 || b->budget > upper_count(n))
      throw Error(ErrorCode::InadmissibleQuery,
                  "budget K must lie in [0, " + std::to_string(upper_count(n)) + "]");
  }
}

inline std::vector<Position> positions_of(const std::vector<int>& subset, int n) {
  const auto all = upper_positions(n);
  std::vector<Position> out;
  for (int s : subset) out.push_back(all[static_cast<std::size_t>(s)]);
  return out;
}

inline BoxedProblem freed_box(const LogMatrix& base, const std::vector<int>& subset,
                              const ScaleBound& bound) {
  BoxedProblem p{base, base.upper(), base.upper()};
  const double mbar = bound.log_bound();
  for (int s : subset) {
    p.lo[static_cast<std::size_t>(s)] = -mbar;
    p.hi[static_cast<std::size_t>(s)] = mbar;
  }
  return p;
}

/// Objective-units target for "phi <= alpha" with the acceptance slack.
inline double acceptance_target(const ReductionQuery& q, double alpha,
                                const ReduceOptions& o) {
  double a = alpha + o.accept_tol;
  if (q.kind == IndexKind::CM && a >= 1.0) a = alpha;
  threshold_transform(q.kind, alpha, q.matrix.order(), q.ri);  // validates alpha
  return threshold_transform(q.kind, a, q.matrix.order(), q.ri);
}

inline Witness make_witness(const ReductionQuery& q, const std::vector<int>& subset,
                            const SolveReport& r, const ReduceOptions& o,
                            std::optional<double> alpha) {
  const int n = q.matrix.order();
  auto up = q.matrix.upper();
  for (int s : subset) up[static_cast<std::size_t>(s)] = std::exp(r.upper[s]);
  Witness w{.positions = positions_of(subset, n),
            .matrix = ComparisonMatrix::from_upper(n, up)};
  w.changed = differing_positions(q.matrix, w.matrix);
  w.value = index_value(q.kind, w.matrix, q.ri);
  w.objective = r.objective;
  w.status = r.status;
  if (o.round_to_scale) {
    auto rup = up;
    for (int s : subset)
      rup[static_cast<std::size_t>(s)] = round_to_scale(rup[s], q.bound);
    w.rounded = ComparisonMatrix::from_upper(n, rup);
    w.rounded_value = index_value(q.kind, *w.rounded, q.ri);
    if (alpha) w.rounded_acceptable = w.rounded_value <= *alpha + o.accept_tol;
  }
  return w;
}

/// Runs `solve` on each subset; results[s] is empty for subsets not run.
/// With first_only the sequential path stops at the first accepted report;
/// the parallel path always finishes the level so the outcome does not
/// depend on scheduling.
template <class Solve, class Accept>
std::vector<std::optional<SolveReport>> run_level(
    const std::vector<std::vector<int>>& subsets, Solve&& solve, Accept&& accept,
    bool first_only, const ReduceOptions& o, ReductionStats& stats) {
  std::vector<std::optional<SolveReport>> results(subsets.size());
  auto expired = [&] {
    return o.deadline && std::chrono::steady_clock::now() > *o.deadline;
  };
  std::atomic<bool> timed_out{false};

  if (o.threads <= 1 || subsets.size() < 2) {
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      if (expired()) {
        timed_out = true;
        break;
      }
      results[s] = solve(subsets[s]);
      ++stats.subproblems;
      if (first_only && accept(*results[s])) break;
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t s = next.fetch_add(1);
        if (s >= subsets.size() || timed_out) return;
        if (expired()) {
          timed_out = true;
          return;
        }
        results[s] = solve(subsets[s]);
      }
    };
    std::vector<std::thread> pool;
    const unsigned t = std::min<unsigned>(o.threads, static_cast<unsigned>(subsets.size()));
    for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (const auto& r : results)
      if (r) ++stats.subproblems;
  }
  for (const auto& r : results)
    if (r && r->status == SolveStatus::IterationLimit) ++stats.solver_limits;
  if (timed_out) throw ReductionTimeout(stats);
  return results;
}

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline ReductionResult changes(const ReductionQuery& q, bool enumerate,
                               const ReduceOptions& o) {
  const auto t0 = Clock::now();
  check_query(q);
  const auto* mc = std::get_if<MinChanges>(&q.mode);
  if (!mc)
    throw Error(ErrorCode::InadmissibleQuery, "query is not in threshold mode");
  const int n = q.matrix.order();
  const int m = upper_count(n);
  const double target = acceptance_target(q, mc->alpha, o);
  const LogMatrix base = to_log(q.matrix);

  ReductionResult res;
  res.kind = q.kind;
  res.mode = q.mode;
  res.enumerated = enumerate;
  res.initial_value = index_value(q.kind, q.matrix, q.ri);

  auto solve = [&](const std::vector<int>& subset) {
    return reaches(q.kind, freed_box(base, subset, q.bound), target, o.solver);
  };
  auto accept = [](const SolveReport& r) { return r.status == SolveStatus::Feasible; };

  std::uint64_t planned = 0;
  for (int k = 0; k <= m; ++k) {
    planned = saturating_add(planned, choose(m, k));
    if (o.work_budget && planned > o.work_budget) {
      res.stats.wall_seconds = seconds_since(t0);
      throw WorkBudgetError(planned, o.work_budget);
    }
    const auto subsets = combinations(m, k);
    const auto results = run_level(subsets, solve, accept, !enumerate, o, res.stats);
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      if (!results[s] || !accept(*results[s])) continue;
      res.solutions.push_back(make_witness(q, subsets[s], *results[s], o, mc->alpha));
      if (!enumerate) break;
    }
    if (!res.solutions.empty()) {
      res.l_star = k;
      res.stats.wall_seconds = seconds_since(t0);
      return res;
    }
  }
  throw Error(ErrorCode::ConvergenceFailure,
              "no pattern reached the threshold, not even with every cell free");
}

}  // namespace detail

/// Fewest cells to change; stops at the first working subset.
inline ReductionResult min_changes(const ReductionQuery& q, const ReduceOptions& o = {}) {
  return detail::changes(q, false, o);
}

/// Every optimal pattern of min_changes, lexicographically sorted.
inline ReductionResult enumerate_optimal(const ReductionQuery& q,
                                         const ReduceOptions& o = {}) {
  return detail::changes(q, true, o);
}

/// Lowest index reachable by changing at most K cells.
inline ReductionResult min_index(const ReductionQuery& q, const ReduceOptions& o = {}) {
  const auto t0 = detail::Clock::now();
  detail::check_query(q);
  const auto* mi = std::get_if<MinIndex>(&q.mode);
  if (!mi) throw Error(ErrorCode::InadmissibleQuery, "query is not in budget mode");
  const int n = q.matrix.order();
  const int m = upper_count(n);
  const int k = std::min(mi->budget, m);

  ReductionResult res;
  res.kind = q.kind;
  res.mode = q.mode;
  res.initial_value = index_value(q.kind, q.matrix, q.ri);

  const std::uint64_t planned = choose(m, k);
  if (o.work_budget && planned > o.work_budget) throw WorkBudgetError(planned, o.work_budget);

  const LogMatrix base = to_log(q.matrix);
  auto solve = [&](const std::vector<int>& subset) {
    return minimize(q.kind, detail::freed_box(base, subset, q.bound), o.solver);
  };
  auto never = [](const SolveReport&) { return false; };
  const auto subsets = combinations(m, k);
  const auto results = detail::run_level(subsets, solve, never, false, o, res.stats);

  std::size_t best = 0;
  for (std::size_t s = 1; s < subsets.size(); ++s)
    if (results[s]->objective < results[best]->objective) best = s;
  const double tie_tol = 1e-9 * std::max(1.0, std::abs(results[best]->objective));
  for (std::size_t s = 0; s < subsets.size(); ++s)
    if (s != best && results[s]->objective <= results[best]->objective + tie_tol)
      res.stats.ties.push_back(detail::positions_of(subsets[s], n));

  res.solutions.push_back(
      detail::make_witness(q, subsets[best], *results[best], o, std::nullopt));
  res.alpha_opt = res.solutions.front().value;
  res.stats.wall_seconds = detail::seconds_since(t0);
  return res;
}

/// Upper bound on subproblems a query can need (all levels for MinChanges).
inline std::uint64_t estimate_work(const ReductionQuery& q) {
  const int m = upper_count(q.matrix.order());
  if (const auto* mi = std::get_if<MinIndex>(&q.mode))
    return choose(m, std::min(mi->budget, m));
  std::uint64_t total = 0;
  for (int k = 0; k <= m; ++k) total = saturating_add(total, choose(m, k));
  return total;
}

}  // namespace pcmr
