#pragma once

// Projected BFGS for smooth convex functions on a box lo <= x <= hi.
//
// Each iteration fixes the coordinates sitting on a bound with the gradient
// pointing outward, takes a quasi-Newton step on the rest, and backtracks
// along the projected path P(x + t d) until an Armijo condition holds. If
// that fails the step falls back to projected steepest descent with a fresh
// curvature model.
//
// Because the function is convex, every iterate also yields a certified
// lower bound on the box minimum:
//
//     f* >= f(x) + sum_i min(g_i (lo_i - x_i), g_i (hi_i - x_i)),
//
// which lets feasibility callers stop as soon as the answer is decided.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcmr::opt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct BoxOptions {
  double tol = 1e-8;  // on the projected-gradient infinity norm
  int max_iterations = 10000;
};

/// Stalled: no decrease is representable in floating point although the
/// projected gradient is still above tol.
enum class BoxStatus { Converged, Stopped, Stalled, IterationLimit };

struct BoxResult {
  BoxStatus status = BoxStatus::IterationLimit;
  Vec x;
  double f = 0.0;
  Vec g;
  int iterations = 0;
  int evaluations = 0;
  double kkt = 0.0;
  double lower_bound = -std::numeric_limits<double>::infinity();
};

inline Vec project(const Vec& x, const Vec& lo, const Vec& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

inline double projected_gradient_norm(const Vec& x, const Vec& g, const Vec& lo,
                                      const Vec& hi) {
  if (x.size() == 0) return 0.0;
  return (x - project(x - g, lo, hi)).cwiseAbs().maxCoeff();
}

inline double linear_lower_bound(double f, const Vec& x, const Vec& g,
                                 const Vec& lo, const Vec& hi) {
  double lb = f;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    lb += std::min(g(i) * (lo(i) - x(i)), g(i) * (hi(i) - x(i)));
  return lb;
}

/// `fun(x, g)` returns f(x) and writes the gradient into g.
/// `stop(f, lower_bound)` may end the run early (status Stopped).
template <class Fun, class Stop>
BoxResult minimize_box(Fun&& fun, const Vec& x0, const Vec& lo, const Vec& hi,
                       const BoxOptions& opts, Stop&& stop) {
  const Eigen::Index n = x0.size();
  BoxResult r;
  r.x = project(x0, lo, hi);
  r.g = Vec::Zero(n);
  r.f = fun(r.x, r.g);
  r.evaluations = 1;

  Mat h = Mat::Identity(n, n);
  bool scaled = false;
  Vec gt(n);

  for (;;) {
    r.kkt = projected_gradient_norm(r.x, r.g, lo, hi);
    r.lower_bound =
        std::max(r.lower_bound, linear_lower_bound(r.f, r.x, r.g, lo, hi));
    if (stop(r.f, r.lower_bound)) {
      r.status = BoxStatus::Stopped;
      return r;
    }
    if (r.kkt <= opts.tol) {
      r.status = BoxStatus::Converged;
      return r;
    }
    if (r.iterations >= opts.max_iterations) {
      r.status = BoxStatus::IterationLimit;
      return r;
    }
    ++r.iterations;

    // coordinates held at a bound
    const double eps_active = std::min(1e-9, r.kkt);
    Eigen::Array<bool, Eigen::Dynamic, 1> held(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      held(i) = (lo(i) >= hi(i)) ||
                (r.x(i) <= lo(i) + eps_active && r.g(i) > 0.0) ||
                (r.x(i) >= hi(i) - eps_active && r.g(i) < 0.0);
    }

    auto try_direction = [&](const Vec& d, double t0, Vec& xt, double& ft) {
      double t = t0;
      for (int k = 0; k < 60; ++k, t *= 0.5) {
        xt = project(r.x + t * d, lo, hi);
        const Vec step = xt - r.x;
        if (step.cwiseAbs().maxCoeff() == 0.0) return false;
        const double slope = r.g.dot(step);
        if (slope >= 0.0) continue;
        ft = fun(xt, gt);
        ++r.evaluations;
        if (!std::isfinite(ft)) continue;
        if (ft <= r.f + 1e-4 * slope) return true;
        // flat within rounding: accept if the stationarity measure improves
        if (ft <= r.f + 1e-14 * std::abs(r.f) &&
            projected_gradient_norm(xt, gt, lo, hi) < r.kkt)
          return true;
      }
      return false;
    };

    Vec d = Vec::Zero(n);
    {
      Vec gf = r.g;
      for (Eigen::Index i = 0; i < n; ++i)
        if (held(i)) gf(i) = 0.0;
      d = -(h * gf);
      for (Eigen::Index i = 0; i < n; ++i)
        if (held(i)) d(i) = 0.0;
    }

    Vec xt(n);
    double ft = 0.0;
    bool ok = r.g.dot(d) < 0.0 && try_direction(d, 1.0, xt, ft);
    if (!ok) {
      h.setIdentity();
      scaled = false;
      const double gmax = r.g.cwiseAbs().maxCoeff();
      ok = try_direction(-r.g, gmax > 0.0 ? 1.0 / gmax : 1.0, xt, ft);
    }
    if (!ok) {
      r.status = BoxStatus::Stalled;
      return r;
    }

    const Vec s = xt - r.x;
    const Vec y = gt - r.g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      if (!scaled) {
        h *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Vec hy = h * y;
      // H+ = H - rho (s hy' + hy s') + (rho^2 y'Hy + rho) s s'
      h.noalias() -= rho * (s * hy.transpose() + hy * s.transpose());
      h.noalias() += (rho * rho * y.dot(hy) + rho) * (s * s.transpose());
    }
    r.x = xt;
    r.f = ft;
    r.g = gt;
  }
}

template <class Fun>
BoxResult minimize_box(Fun&& fun, const Vec& x0, const Vec& lo, const Vec& hi,
                       const BoxOptions& opts = {}) {
  return minimize_box(std::forward<Fun>(fun), x0, lo, hi, opts,
                      [](double, double) { return false; });
}

}  // namespace pcmr::opt
