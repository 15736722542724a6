#pragma once

// Continuous subproblems left once the binary pattern is fixed: some
// upper-triangle log entries are free inside a box, the rest are pinned.
//
//   CR  minimize lambda_max(exp X). Smooth and convex in X; its gradient is
//       d lambda / d x_ij = (v_i w_j a_ij - v_j w_i a_ji) / (v'w)
//       with w, v the right and left Perron vectors. Reported scaling
//       variables are z = log w normalized to z_1 = 0, so that
//       max_i sum_j exp(x_ij + z_j - z_i) reproduces the objective.
//   CI  minimize sum over triads of e^{s} + e^{-s}, s = x_ij + x_jk - x_ik.
//   CM  minimize max over triads of |x_ij + x_jk - x_ik|: an LP.
//
// CR and CI go through opt::minimize_box; CM through the simplex.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pcmr/box_minimize.hpp"
#include "pcmr/indices.hpp"
#include "pcmr/pcm.hpp"
#include "pcmr/simplex.hpp"

namespace pcmr {

/// One branch of the binary tree: `free` cells may move inside
/// [-log M, log M], every other cell keeps its base value.
class SubproblemSpec {
 public:
  SubproblemSpec(LogMatrix base, std::vector<Position> free, ScaleBound bound)
      : base_(std::move(base)), free_(std::move(free)), bound_(bound) {
    const int n = base_.order();
    std::sort(free_.begin(), free_.end());
    for (std::size_t s = 0; s < free_.size(); ++s) {
      const auto& p = free_[s];
      if (p.i < 1 || p.j > n || p.i >= p.j)
        throw Error(ErrorCode::InadmissibleSpec,
                    "free cell " + to_string(p) + " is not above the diagonal",
                    p.i, p.j);
      if (s > 0 && free_[s - 1] == p)
        throw Error(ErrorCode::InadmissibleSpec,
                    "free cell " + to_string(p) + " listed twice", p.i, p.j);
    }
    const double mbar = bound_.log_bound();
    for (const auto& p : upper_positions(n)) {
      if (std::binary_search(free_.begin(), free_.end(), p)) continue;
      if (std::abs(base_.at(p)) > mbar * (1.0 + 1e-12) + 1e-15)
        throw Error(ErrorCode::InadmissibleSpec,
                    "pinned cell " + to_string(p) + " lies outside the scale bound",
                    p.i, p.j);
    }
  }

  const LogMatrix& base() const noexcept { return base_; }
  const std::vector<Position>& free() const noexcept { return free_; }
  const ScaleBound& bound() const noexcept { return bound_; }
  int order() const noexcept { return base_.order(); }

 private:
  LogMatrix base_;
  std::vector<Position> free_;
  ScaleBound bound_;
};

/// Per-cell box form shared by SubproblemSpec and the Big-M relaxations:
/// every upper cell p has lo[p] <= x_p <= hi[p]; lo == hi pins it.
struct BoxedProblem {
  LogMatrix base;
  std::vector<double> lo;
  std::vector<double> hi;

  int order() const { return base.order(); }

  static BoxedProblem from_spec(const SubproblemSpec& spec) {
    BoxedProblem b{spec.base(), spec.base().upper(), spec.base().upper()};
    const double mbar = spec.bound().log_bound();
    for (const auto& p : spec.free()) {
      const auto s = static_cast<std::size_t>(linear_index(p, spec.order()));
      b.lo[s] = -mbar;
      b.hi[s] = mbar;
    }
    return b;
  }
};

enum class SolveStatus { Optimal, Feasible, Infeasible, IterationLimit };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

struct SolveReport {
  SolveStatus status = SolveStatus::IterationLimit;
  double objective = 0.0;
  /// Values of every upper cell at the returned point (row-major); the
  /// free cells are the ones that may differ from the base.
  std::vector<double> upper;
  double lambda = 0.0;  // CR only
  Vector z;             // CR only, z_1 = 0
  int iterations = 0;
  double kkt_residual = 0.0;
  /// Certified lower bound on the subproblem minimum.
  double lower_bound = -std::numeric_limits<double>::infinity();

  LogMatrix point(int n) const { return LogMatrix::from_upper(n, upper); }
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iterations = 10000;
  /// Optional start for the free cells (full upper vector; pinned entries
  /// are ignored). Defaults to the base projected onto the box.
  std::optional<std::vector<double>> start;
};

namespace detail {

struct TriadCells {
  int ij, jk, ik;  // linear indices of x_ij, x_jk, x_ik
};

inline std::vector<TriadCells> triad_cells(int n) {
  std::vector<TriadCells> out;
  for (const auto& t : triads(n))
    out.push_back({linear_index({t.i, t.j}, n), linear_index({t.j, t.k}, n),
                   linear_index({t.i, t.k}, n)});
  return out;
}

/// Free-variable view of a BoxedProblem.
struct Layout {
  int n = 0;
  std::vector<int> vars;  // linear index of each variable cell
  std::vector<double> fixed;  // full upper vector with pinned values
  opt::Vec lo, hi;

  explicit Layout(const BoxedProblem& p) : n(p.order()), fixed(p.base.upper()) {
    const int m = upper_count(n);
    for (int s = 0; s < m; ++s) {
      if (p.lo[s] > p.hi[s])
        throw Error(ErrorCode::InadmissibleSpec, "empty box for a cell");
      if (p.lo[s] < p.hi[s]) {
        vars.push_back(s);
      } else {
        fixed[s] = p.lo[s];
      }
    }
    lo.resize(static_cast<Eigen::Index>(vars.size()));
    hi.resize(lo.size());
    for (std::size_t v = 0; v < vars.size(); ++v) {
      lo(static_cast<Eigen::Index>(v)) = p.lo[vars[v]];
      hi(static_cast<Eigen::Index>(v)) = p.hi[vars[v]];
    }
  }

  std::vector<double> expand(const opt::Vec& x) const {
    std::vector<double> up = fixed;
    for (std::size_t v = 0; v < vars.size(); ++v)
      up[vars[v]] = x(static_cast<Eigen::Index>(v));
    return up;
  }

  opt::Vec start(const BoxedProblem& p, const SolveOptions& o) const {
    opt::Vec x(static_cast<Eigen::Index>(vars.size()));
    const auto base = p.base.upper();
    for (std::size_t v = 0; v < vars.size(); ++v)
      x(static_cast<Eigen::Index>(v)) =
          o.start ? (*o.start)[vars[v]] : base[vars[v]];
    return opt::project(x, lo, hi);
  }
};

inline Matrix exp_matrix(int n, const std::vector<double>& up) {
  Matrix a = Matrix::Ones(n, n);
  std::size_t s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++s) {
      a(i, j) = std::exp(up[s]);
      a(j, i) = 1.0 / a(i, j);
    }
  return a;
}

/// lambda_max(exp X) and its gradient with respect to every upper cell.
inline double cr_value_gradient(int n, const std::vector<double>& up,
                                std::vector<double>* grad, Vector* right = nullptr) {
  const Matrix a = exp_matrix(n, up);
  const auto pr = perron_iterate(a, 1e-14, 1000 * n);
  if (grad) {
    const Matrix at = a.transpose();
    const auto pl = perron_iterate(at, 1e-14, 1000 * n);
    const Vector& w = pr.vector;
    const Vector& v = pl.vector;
    const double vw = v.dot(w);
    grad->assign(static_cast<std::size_t>(upper_count(n)), 0.0);
    std::size_t s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j, ++s)
        (*grad)[s] = (v(i) * w(j) * a(i, j) - v(j) * w(i) * a(j, i)) / vw;
  }
  if (right) *right = pr.vector;
  return pr.lambda;
}

inline double ci_value_gradient(const std::vector<TriadCells>& cells,
                                const std::vector<double>& up,
                                std::vector<double>* grad) {
  if (grad) grad->assign(up.size(), 0.0);
  double f = 0.0;
  for (const auto& c : cells) {
    const double s = up[c.ij] + up[c.jk] - up[c.ik];
    const double ep = std::exp(s);
    const double em = std::exp(-s);
    f += ep + em;
    if (grad) {
      const double d = ep - em;
      (*grad)[c.ij] += d;
      (*grad)[c.jk] += d;
      (*grad)[c.ik] -= d;
    }
  }
  return f;
}

/// Target for feasibility mode; nullopt means plain minimization.
using Target = std::optional<double>;

inline SolveReport smooth_solve(IndexKind kind, const BoxedProblem& p,
                                const SolveOptions& o, Target target) {
  const Layout lay(p);
  const int n = lay.n;
  const auto cells = triad_cells(n);
  std::vector<double> full_grad;

  auto fun = [&](const opt::Vec& x, opt::Vec& g) {
    const auto up = lay.expand(x);
    const double f = kind == IndexKind::CR
                         ? cr_value_gradient(n, up, &full_grad)
                         : ci_value_gradient(cells, up, &full_grad);
    g.resize(x.size());
    for (std::size_t v = 0; v < lay.vars.size(); ++v)
      g(static_cast<Eigen::Index>(v)) = full_grad[lay.vars[v]];
    return f;
  };
  auto stop = [&](double f, double lb) {
    return target && (f <= *target || lb > *target);
  };

  opt::BoxOptions bo;
  bo.tol = o.tol;
  bo.max_iterations = o.max_iterations;
  const auto r = opt::minimize_box(fun, lay.start(p, o), lay.lo, lay.hi, bo, stop);

  SolveReport rep;
  rep.upper = lay.expand(r.x);
  rep.objective = r.f;
  rep.iterations = r.iterations;
  rep.kkt_residual = r.kkt;
  rep.lower_bound = r.lower_bound;
  if (kind == IndexKind::CR) {
    Vector w;
    rep.lambda = cr_value_gradient(n, rep.upper, nullptr, &w);
    rep.z = w.array().log();
    rep.z.array() -= rep.z(0);
  }

  // Stalled with a small residual is the floating-point floor of a
  // converged run.
  const bool converged =
      r.status == opt::BoxStatus::Converged ||
      (r.status == opt::BoxStatus::Stalled && r.kkt <= 1e3 * o.tol);
  if (target) {
    if (r.f <= *target) {
      rep.status = SolveStatus::Feasible;
    } else if (r.lower_bound > *target || converged) {
      rep.status = SolveStatus::Infeasible;
    } else {
      rep.status = SolveStatus::IterationLimit;
    }
  } else {
    rep.status = converged ? SolveStatus::Optimal : SolveStatus::IterationLimit;
  }
  return rep;
}

inline SolveReport cm_solve(const BoxedProblem& p, Target target) {
  const Layout lay(p);
  const int n = lay.n;
  const auto nv = lay.vars.size();
  std::vector<int> var_of(static_cast<std::size_t>(upper_count(n)), -1);
  for (std::size_t v = 0; v < nv; ++v) var_of[lay.vars[v]] = static_cast<int>(v);

  // variables: free cells, then t; minimize t
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  double reach = 0.0;
  for (std::size_t s = 0; s < lay.fixed.size(); ++s) reach = std::max(reach, std::abs(lay.fixed[s]));
  for (Eigen::Index v = 0; v < lay.lo.size(); ++v)
    reach = std::max({reach, std::abs(lay.lo(v)), std::abs(lay.hi(v))});

  for (const auto& c : triad_cells(n)) {
    std::vector<double> row(nv + 1, 0.0);
    double constant = 0.0;
    auto add = [&](int cell, double coef) {
      if (var_of[cell] >= 0) {
        row[static_cast<std::size_t>(var_of[cell])] += coef;
      } else {
        constant += coef * lay.fixed[cell];
      }
    };
    add(c.ij, 1.0);
    add(c.jk, 1.0);
    add(c.ik, -1.0);
    // s <= t  and  -s <= t
    std::vector<double> neg(row.size());
    for (std::size_t k = 0; k < nv; ++k) neg[k] = -row[k];
    row[nv] = -1.0;
    neg[nv] = -1.0;
    a.push_back(std::move(row));
    b.push_back(-constant);
    a.push_back(std::move(neg));
    b.push_back(constant);
  }
  std::vector<double> c(nv + 1, 0.0), lo(nv + 1), hi(nv + 1);
  c[nv] = 1.0;
  for (std::size_t v = 0; v < nv; ++v) {
    lo[v] = lay.lo(static_cast<Eigen::Index>(v));
    hi[v] = lay.hi(static_cast<Eigen::Index>(v));
  }
  lo[nv] = 0.0;
  hi[nv] = 3.0 * reach + 1.0;

  const auto r = lp::minimize_boxed(a, b, c, lo, hi);
  SolveReport rep;
  rep.iterations = r.pivots;
  if (r.status != lp::Status::Optimal)
    throw Error(ErrorCode::ConvergenceFailure, "triad LP did not reach optimality");
  opt::Vec x(static_cast<Eigen::Index>(nv));
  for (std::size_t v = 0; v < nv; ++v)
    x(static_cast<Eigen::Index>(v)) = std::clamp(r.x[v], lo[v], hi[v]);
  rep.upper = lay.expand(x);
  // report the exact max at the returned point rather than the LP's t
  rep.objective = max_triad_deviation(LogMatrix::from_upper(n, rep.upper));
  rep.lower_bound = r.objective;
  rep.kkt_residual = r.primal_violation;
  if (target) {
    // rounding slack only; the LP itself is exact
    rep.status = rep.objective <= *target + 1e-12 ? SolveStatus::Feasible
                                                  : SolveStatus::Infeasible;
  } else {
    rep.status = SolveStatus::Optimal;
  }
  return rep;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Box-form entry points (also used by the Big-M relaxations)

/// Minimum of the index's log-space objective over the box.
inline SolveReport minimize(IndexKind kind, const BoxedProblem& p,
                            const SolveOptions& o = {}) {
  if (kind == IndexKind::CM) return detail::cm_solve(p, std::nullopt);
  return detail::smooth_solve(kind, p, o, std::nullopt);
}

/// Feasible iff the minimum is at most alpha_star (objective units).
inline SolveReport feasible(IndexKind kind, const BoxedProblem& p,
                            double alpha_star, const SolveOptions& o = {}) {
  if (kind == IndexKind::CM) return detail::cm_solve(p, alpha_star);
  return detail::smooth_solve(kind, p, o, alpha_star + o.tol);
}

/// Like feasible() without the solver slack: a Feasible report's point has
/// objective <= target itself.
inline SolveReport reaches(IndexKind kind, const BoxedProblem& p, double target,
                           const SolveOptions& o = {}) {
  if (kind == IndexKind::CM) return detail::cm_solve(p, target);
  return detail::smooth_solve(kind, p, o, target);
}

// ---------------------------------------------------------------------------
// Spec-level operations

inline SolveReport min_lambda_cr(const SubproblemSpec& spec, const SolveOptions& o = {}) {
  return minimize(IndexKind::CR, BoxedProblem::from_spec(spec), o);
}

inline SolveReport feasible_cr(const SubproblemSpec& spec, double alpha_star,
                               const SolveOptions& o = {}) {
  return feasible(IndexKind::CR, BoxedProblem::from_spec(spec), alpha_star, o);
}

inline SolveReport min_cm(const SubproblemSpec& spec) {
  return minimize(IndexKind::CM, BoxedProblem::from_spec(spec));
}

inline SolveReport feasible_cm(const SubproblemSpec& spec, double alpha_star) {
  return feasible(IndexKind::CM, BoxedProblem::from_spec(spec), alpha_star);
}

inline SolveReport min_ci(const SubproblemSpec& spec, const SolveOptions& o = {}) {
  return minimize(IndexKind::CI, BoxedProblem::from_spec(spec), o);
}

inline SolveReport feasible_ci(const SubproblemSpec& spec, double alpha_star,
                               const SolveOptions& o = {}) {
  return feasible(IndexKind::CI, BoxedProblem::from_spec(spec), alpha_star, o);
}

/// max_i sum_j exp(x_ij + z_j - z_i): the row-constraint value of the
/// lambda program at (X, z). Equals lambda_max(exp X) when z is the log
/// Perron vector and bounds it from above otherwise.
inline double frobenius_row_max(const LogMatrix& x, const Vector& z) {
  const int n = x.order();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += std::exp(x(i, j) + z(j) - z(i));
    worst = std::max(worst, row);
  }
  return worst;
}

inline nlohmann::json to_json(const SolveReport& r, const std::vector<Position>& free,
                              int n) {
  nlohmann::json j;
  j["status"] = std::string(to_string(r.status));
  j["objective"] = r.objective;
  nlohmann::json xs = nlohmann::json::array();
  for (const auto& p : free)
    xs.push_back({{"i", p.i}, {"j", p.j},
                  {"x", r.upper[static_cast<std::size_t>(linear_index(p, n))]}});
  j["x"] = xs;
  if (r.z.size() > 0) {
    j["lambda"] = r.lambda;
    j["z"] = std::vector<double>(r.z.data(), r.z.data() + r.z.size());
  }
  j["iterations"] = r.iterations;
  j["kkt_residual"] = r.kkt_residual;
  return j;
}

}  // namespace pcmr
