#pragma once

// Pairwise comparison matrices: the validated positive reciprocal matrix,
// its elementwise logarithm, upper-triangle positions and triads.
//
// Indexing convention: Position and TriadIndex are 1-based (they appear in
// reports and file formats); the Eigen storage behind both matrix types is
// 0-based.

#include <Eigen/Dense>

#include <cmath>
#include <compare>
#include <string>
#include <vector>

#include "pcmr/error.hpp"

namespace pcmr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultReciprocityTol = 1e-6;
inline constexpr double kDefaultDistanceTol = 1e-9;
inline constexpr double kDefaultConsistencyTol = 1e-9;

/// Upper-triangle cell, 1 <= i < j <= n.
struct Position {
  int i = 0;
  int j = 0;
  auto operator<=>(const Position&) const = default;
};

/// Index triple 1 <= i < j < k <= n.
struct TriadIndex {
  int i = 0;
  int j = 0;
  int k = 0;
  auto operator<=>(const TriadIndex&) const = default;
};

inline std::string to_string(Position p) {
  return "(" + std::to_string(p.i) + "," + std::to_string(p.j) + ")";
}

inline std::string to_string(const std::vector<Position>& ps) {
  std::string out = "{";
  for (std::size_t s = 0; s < ps.size(); ++s) {
    if (s) out += ", ";
    out += to_string(ps[s]);
  }
  return out + "}";
}

/// Number of cells above the main diagonal.
constexpr int upper_count(int n) { return n * (n - 1) / 2; }

/// Number of triads, C(n, 3).
constexpr long long triad_count(int n) {
  return n < 3 ? 0 : static_cast<long long>(n) * (n - 1) * (n - 2) / 6;
}

/// Upper-triangle positions in row-major order: (1,2), (1,3), ..., (n-1,n).
inline std::vector<Position> upper_positions(int n) {
  std::vector<Position> out;
  out.reserve(static_cast<std::size_t>(upper_count(n)));
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) out.push_back({i, j});
  return out;
}

/// Row-major linear index (0-based) of an upper-triangle position.
constexpr int linear_index(Position p, int n) {
  // cells in rows 1..i-1, then offset inside row i
  return (p.i - 1) * n - (p.i - 1) * p.i / 2 + (p.j - p.i - 1);
}

inline std::vector<TriadIndex> triads(int n) {
  if (n < 3)
    throw Error(ErrorCode::OrderTooSmall,
                "triads need order >= 3, got " + std::to_string(n));
  std::vector<TriadIndex> out;
  out.reserve(static_cast<std::size_t>(triad_count(n)));
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      for (int k = j + 1; k <= n; ++k) out.push_back({i, j, k});
  return out;
}

/// Admissible entry range [1/M, M]; log_bound() is M̄ = ln M.
class ScaleBound {
 public:
  explicit ScaleBound(double max_value = 9.0) : max_(max_value) {
    if (!(max_value >= 1.0) || !std::isfinite(max_value))
      throw Error(ErrorCode::InadmissibleQuery,
                  "scale bound must be a finite value >= 1");
  }

  double max_value() const noexcept { return max_; }
  double log_bound() const noexcept { return std::log(max_); }
  bool admits(double a) const noexcept {
    // relative slack so that 1/9 stored as a double is still inside [1/9, 9]
    return a >= (1.0 / max_) * (1.0 - 1e-12) && a <= max_ * (1.0 + 1e-12);
  }

 private:
  double max_;
};

class LogMatrix;

/// Positive reciprocal matrix with unit diagonal. The upper triangle is
/// authoritative; the lower triangle always holds exact reciprocals.
class ComparisonMatrix {
 public:
  /// Builds from upper-triangle values in row-major order.
  static ComparisonMatrix from_upper(int n, const std::vector<double>& upper) {
    if (n < 3)
      throw Error(ErrorCode::OrderTooSmall,
                  "matrix order must be >= 3, got " + std::to_string(n));
    if (upper.size() != static_cast<std::size_t>(upper_count(n)))
      throw Error(ErrorCode::OrderMismatch,
                  "expected " + std::to_string(upper_count(n)) +
                      " upper-triangle entries for order " + std::to_string(n) +
                      ", got " + std::to_string(upper.size()));
    Matrix a = Matrix::Ones(n, n);
    std::size_t s = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j, ++s) {
        const double v = upper[s];
        if (!(v > 0.0) || !std::isfinite(v))
          throw Error(ErrorCode::NonPositiveEntry,
                      "entry " + to_string(Position{i + 1, j + 1}) +
                          " must be positive and finite",
                      i + 1, j + 1);
        a(i, j) = v;
        a(j, i) = 1.0 / v;
      }
    }
    return ComparisonMatrix(std::move(a));
  }

  int order() const noexcept { return static_cast<int>(a_.rows()); }
  const Matrix& data() const noexcept { return a_; }
  /// 0-based element access.
  double operator()(int r, int c) const { return a_(r, c); }
  /// 1-based upper-triangle access.
  double at(Position p) const { return a_(p.i - 1, p.j - 1); }

  std::vector<double> upper() const {
    std::vector<double> out;
    const int n = order();
    out.reserve(static_cast<std::size_t>(upper_count(n)));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) out.push_back(a_(i, j));
    return out;
  }

  /// Copy with the upper cell p (and its reciprocal) replaced.
  ComparisonMatrix with_entry(Position p, double value) const {
    auto up = upper();
    up[static_cast<std::size_t>(linear_index(p, order()))] = value;
    return from_upper(order(), up);
  }

  bool operator==(const ComparisonMatrix& o) const { return a_ == o.a_; }

 private:
  explicit ComparisonMatrix(Matrix a) : a_(std::move(a)) {}

  Matrix a_;
};

/// Skew-symmetric matrix of natural logarithms of judgment ratios.
class LogMatrix {
 public:
  static LogMatrix from_upper(int n, const std::vector<double>& upper) {
    if (n < 3)
      throw Error(ErrorCode::OrderTooSmall,
                  "matrix order must be >= 3, got " + std::to_string(n));
    if (upper.size() != static_cast<std::size_t>(upper_count(n)))
      throw Error(ErrorCode::OrderMismatch, "upper-triangle length mismatch");
    Matrix x = Matrix::Zero(n, n);
    std::size_t s = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j, ++s) {
        x(i, j) = upper[s];
        x(j, i) = -upper[s];
      }
    }
    return LogMatrix(std::move(x));
  }

  /// Skew-symmetric part is taken from the upper triangle of `x`.
  static LogMatrix from_dense(const Matrix& x) {
    if (x.rows() != x.cols())
      throw Error(ErrorCode::OrderMismatch, "log matrix must be square");
    const int n = static_cast<int>(x.rows());
    std::vector<double> up;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) up.push_back(x(i, j));
    return from_upper(n, up);
  }

  int order() const noexcept { return static_cast<int>(x_.rows()); }
  const Matrix& data() const noexcept { return x_; }
  double operator()(int r, int c) const { return x_(r, c); }
  double at(Position p) const { return x_(p.i - 1, p.j - 1); }

  std::vector<double> upper() const {
    std::vector<double> out;
    const int n = order();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) out.push_back(x_(i, j));
    return out;
  }

  /// x_ij + x_jk + x_ki for the triad (i, j, k).
  double triad_sum(TriadIndex t) const {
    return x_(t.i - 1, t.j - 1) + x_(t.j - 1, t.k - 1) + x_(t.k - 1, t.i - 1);
  }

 private:
  explicit LogMatrix(Matrix x) : x_(std::move(x)) {}
  Matrix x_;
};

/// Checks positivity and reciprocity of a raw square grid and returns the
/// validated matrix. The lower triangle is rebuilt from the upper one.
inline ComparisonMatrix validate(const Matrix& raw,
                                 double tol = kDefaultReciprocityTol) {
  if (raw.rows() != raw.cols())
    throw Error(ErrorCode::ParseError,
                "matrix is not square (" + std::to_string(raw.rows()) + "x" +
                    std::to_string(raw.cols()) + ")");
  const int n = static_cast<int>(raw.rows());
  if (n < 3)
    throw Error(ErrorCode::OrderTooSmall,
                "matrix order must be >= 3, got " + std::to_string(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!(raw(i, j) > 0.0) || !std::isfinite(raw(i, j)))
        throw Error(ErrorCode::NonPositiveEntry,
                    "entry (" + std::to_string(i + 1) + "," +
                        std::to_string(j + 1) + ") must be positive and finite",
                    i + 1, j + 1);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (std::abs(raw(i, j) * raw(j, i) - 1.0) > tol)
        throw Error(ErrorCode::ReciprocityViolation,
                    "entries (" + std::to_string(i + 1) + "," +
                        std::to_string(j + 1) + ") and (" +
                        std::to_string(j + 1) + "," + std::to_string(i + 1) +
                        ") are not reciprocal",
                    i + 1, j + 1);
    }
  }
  std::vector<double> up;
  up.reserve(static_cast<std::size_t>(upper_count(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) up.push_back(raw(i, j));
  return ComparisonMatrix::from_upper(n, up);
}

inline ComparisonMatrix validate(const std::vector<std::vector<double>>& rows,
                                 double tol = kDefaultReciprocityTol) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (static_cast<Eigen::Index>(rows[r].size()) != n)
      throw Error(ErrorCode::ParseError,
                  "row " + std::to_string(r + 1) + " has " +
                      std::to_string(rows[r].size()) + " entries, expected " +
                      std::to_string(n),
                  static_cast<int>(r) + 1, 0);
  Matrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return validate(m, tol);
}

inline LogMatrix to_log(const ComparisonMatrix& a) {
  const int n = a.order();
  std::vector<double> up;
  up.reserve(static_cast<std::size_t>(upper_count(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) up.push_back(std::log(a(i, j)));
  return LogMatrix::from_upper(n, up);
}

inline ComparisonMatrix from_log(const LogMatrix& x) {
  auto up = x.upper();
  for (double& v : up) v = std::exp(v);
  return ComparisonMatrix::from_upper(x.order(), up);
}

/// Largest |x_ij + x_jk + x_ki| over all triads.
inline double max_triad_deviation(const LogMatrix& x) {
  double worst = 0.0;
  for (const auto& t : triads(x.order()))
    worst = std::max(worst, std::abs(x.triad_sum(t)));
  return worst;
}

inline bool is_consistent(const ComparisonMatrix& a,
                          double tol = kDefaultConsistencyTol) {
  return max_triad_deviation(to_log(a)) <= tol;
}

/// Upper-triangle positions where ln a_ij and ln b_ij differ by more than tol.
inline std::vector<Position> differing_positions(
    const ComparisonMatrix& a, const ComparisonMatrix& b,
    double tol = kDefaultDistanceTol) {
  if (a.order() != b.order())
    throw Error(ErrorCode::OrderMismatch,
                "cannot compare matrices of order " + std::to_string(a.order()) +
                    " and " + std::to_string(b.order()));
  std::vector<Position> out;
  for (const auto& p : upper_positions(a.order()))
    if (std::abs(std::log(a.at(p)) - std::log(b.at(p))) > tol) out.push_back(p);
  return out;
}

inline int distance(const ComparisonMatrix& a, const ComparisonMatrix& b,
                    double tol = kDefaultDistanceTol) {
  return static_cast<int>(differing_positions(a, b, tol).size());
}

}  // namespace pcmr
