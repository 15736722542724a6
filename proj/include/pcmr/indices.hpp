#pragma once

// Inconsistency indices CR (Saaty), CM (Koczkodaj-Duszak) and CI
// (Pelaez-Lamata), their acceptance-threshold transforms, and the random
// index table used by CR.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pcmr/pcm.hpp"

namespace pcmr {

enum class IndexKind { CR, CM, CI };

inline constexpr std::array<IndexKind, 3> kAllIndexKinds = {
    IndexKind::CR, IndexKind::CM, IndexKind::CI};

inline std::string_view to_string(IndexKind k) {
  switch (k) {
    case IndexKind::CR: return "CR";
    case IndexKind::CM: return "CM";
    case IndexKind::CI: return "CI";
  }
  return "?";
}

inline std::optional<IndexKind> parse_index_kind(std::string_view s) {
  if (s == "cr" || s == "CR") return IndexKind::CR;
  if (s == "cm" || s == "CM") return IndexKind::CM;
  if (s == "ci" || s == "CI") return IndexKind::CI;
  return std::nullopt;
}

/// Index values at or below this count as "consistent".
inline constexpr double kIndexZeroTol = 1e-8;

// ---------------------------------------------------------------------------
// Random index table

class RandomIndexTable {
 public:
  RandomIndexTable() = default;
  explicit RandomIndexTable(std::map<int, double> values)
      : values_(std::move(values)) {
    for (const auto& [n, ri] : values_)
      if (n < 3 || !(ri > 0.0) || !std::isfinite(ri))
        throw Error(ErrorCode::ParseError,
                    "random index for n=" + std::to_string(n) +
                        " must be a positive number (n >= 3)");
  }

  /// Saaty's published values for n = 3..9.
  static RandomIndexTable saaty() {
    return RandomIndexTable({{3, 0.58},
                             {4, 0.90},
                             {5, 1.12},
                             {6, 1.24},
                             {7, 1.32},
                             {8, 1.41},
                             {9, 1.45}});
  }

  bool contains(int n) const { return values_.count(n) != 0; }

  double at(int n) const {
    auto it = values_.find(n);
    if (it == values_.end())
      throw Error(ErrorCode::MissingRandomIndex,
                  "no random index for n=" + std::to_string(n));
    return it->second;
  }

  const std::map<int, double>& values() const noexcept { return values_; }

  /// {"3": 0.58, "4": 0.9, ...}
  static RandomIndexTable from_json(const nlohmann::json& j) {
    if (!j.is_object())
      throw Error(ErrorCode::ParseError, "random index table must be a JSON object");
    std::map<int, double> vals;
    for (const auto& [key, v] : j.items()) {
      int n = 0;
      try {
        std::size_t used = 0;
        n = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "bad matrix order key \"" + key + "\"");
      }
      if (!v.is_number())
        throw Error(ErrorCode::ParseError, "random index for n=" + key + " is not a number");
      vals[n] = v.get<double>();
    }
    return RandomIndexTable(std::move(vals));
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [n, ri] : values_) j[std::to_string(n)] = ri;
    return j;
  }

  /// FNV-1a over the canonical JSON text; identifies the table in health
  /// reports.
  std::string hash() const {
    const std::string text = to_json().dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
      h ^= c;
      h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  std::map<int, double> values_;
};

// ---------------------------------------------------------------------------
// Perron root

struct PerronResult {
  double lambda = 0.0;
  Vector vector;  // positive, sums to 1
  int iterations = 0;
  double gap = 0.0;  // width of the final Collatz-Wielandt bracket
  bool converged = false;
};

/// Power iteration for the dominant eigenpair of a positive matrix; never
/// throws, reports whether the bracket closed to tol * lambda.
///
/// The stopping test uses the Collatz-Wielandt bracket
/// min_i (Aw)_i/w_i <= lambda <= max_i (Aw)_i/w_i, a guaranteed enclosure
/// of the Perron root for positive w.
inline PerronResult perron_iterate(const Matrix& a, double tol, int max_iterations) {
  const auto n = a.rows();
  // row geometric means are exact for consistent matrices
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = std::exp(a.row(i).array().log().mean());
  w /= w.sum();
  Vector y(n);
  PerronResult r;
  for (int it = 1; it <= max_iterations; ++it) {
    y.noalias() = a * w;
    const Vector ratio = y.cwiseQuotient(w);
    const double lo = ratio.minCoeff();
    const double hi = ratio.maxCoeff();
    const double lambda = y.sum();  // w sums to 1
    w = y / lambda;
    r.lambda = std::clamp(lambda, lo, hi);
    r.iterations = it;
    r.gap = hi - lo;
    if (hi - lo <= tol * hi) {
      r.converged = true;
      break;
    }
  }
  r.vector = w;
  return r;
}

/// As perron_iterate with the default cap of 100 n iterations; throws
/// ConvergenceFailure if the bracket does not close.
inline PerronResult perron(const Matrix& a, double tol = 1e-12,
                           int max_iterations = 0) {
  if (max_iterations <= 0) max_iterations = 100 * static_cast<int>(a.rows());
  auto r = perron_iterate(a, tol, max_iterations);
  if (!r.converged)
    throw Error(ErrorCode::ConvergenceFailure,
                "power iteration did not converge in " +
                    std::to_string(max_iterations) + " iterations");
  return r;
}

inline PerronResult lambda_max(const ComparisonMatrix& a, double tol = 1e-12) {
  return perron(a.data(), tol);
}

// ---------------------------------------------------------------------------
// Index reports

struct TriadDeterminant {
  TriadIndex triad;
  double det = 0.0;
};

struct IndexReport {
  IndexKind kind = IndexKind::CR;
  double value = 0.0;

  // CR detail
  double lambda_max = 0.0;
  Vector perron_vector;
  // CM detail
  TriadIndex worst_triad;
  double z_opt = 0.0;
  // CI detail
  std::vector<TriadDeterminant> determinants;

  bool consistent() const noexcept { return value <= kIndexZeroTol; }
};

inline IndexReport cr(const ComparisonMatrix& a, const RandomIndexTable& ri,
                      double tol = 1e-12) {
  const int n = a.order();
  const double ri_n = ri.at(n);
  auto p = lambda_max(a, tol);
  IndexReport r;
  r.kind = IndexKind::CR;
  r.lambda_max = p.lambda;
  r.perron_vector = std::move(p.vector);
  r.value = std::max(0.0, (p.lambda - n) / ((n - 1) * ri_n));
  return r;
}

struct TriadCm {
  double cm = 0.0;
  double t = 1.0;
};

/// CM and T of the triad [[1,a,b],[1/a,1,c],[1/b,1/c,1]].
inline TriadCm cm_triad(double a, double b, double c) {
  const double cm = std::min({std::abs(a - b / c) / a, std::abs(b - a * c) / b,
                              std::abs(c - b / a) / c});
  const double q = a * c / b;
  return {cm, std::max(q, 1.0 / q)};
}

inline IndexReport cm(const ComparisonMatrix& a) {
  IndexReport r;
  r.kind = IndexKind::CM;
  const LogMatrix x = to_log(a);
  bool first = true;
  for (const auto& t : triads(a.order())) {
    const double v = cm_triad(a(t.i - 1, t.j - 1), a(t.i - 1, t.k - 1),
                              a(t.j - 1, t.k - 1))
                         .cm;
    if (first || v > r.value) {
      r.value = v;
      r.worst_triad = t;
      first = false;
    }
    r.z_opt = std::max(r.z_opt, std::abs(x.triad_sum(t)));
  }
  return r;
}

/// a_ik / (a_ij a_jk) + a_ij a_jk / a_ik - 2
inline double triad_determinant(const ComparisonMatrix& a, TriadIndex t) {
  const double q = a(t.i - 1, t.k - 1) / (a(t.i - 1, t.j - 1) * a(t.j - 1, t.k - 1));
  return std::max(0.0, q + 1.0 / q - 2.0);
}

inline IndexReport ci(const ComparisonMatrix& a) {
  IndexReport r;
  r.kind = IndexKind::CI;
  double sum = 0.0;
  for (const auto& t : triads(a.order())) {
    const double d = triad_determinant(a, t);
    r.determinants.push_back({t, d});
    sum += d;
  }
  r.value = sum / static_cast<double>(triad_count(a.order()));
  return r;
}

inline IndexReport evaluate(IndexKind kind, const ComparisonMatrix& a,
                            const RandomIndexTable& ri) {
  switch (kind) {
    case IndexKind::CR: return cr(a, ri);
    case IndexKind::CM: return cm(a);
    case IndexKind::CI: return ci(a);
  }
  return {};
}

/// Index value of `a` without the diagnostic detail.
inline double index_value(IndexKind kind, const ComparisonMatrix& a,
                          const RandomIndexTable& ri) {
  return evaluate(kind, a, ri).value;
}

// ---------------------------------------------------------------------------
// Log-space functionals and threshold transforms
//
// Each index has a convex functional of the log matrix (the "objective" the
// optimizer works with) and a monotone map between index units and objective
// units:
//   CR: lambda_max(exp X)                 alpha* = n + RI_n (n-1) alpha
//   CM: max_triads |x_ij + x_jk + x_ki|   alpha* = ln(1 / (1 - alpha))
//   CI: sum_triads e^{s} + e^{-s}         alpha* = (alpha + 2) C(n,3)

/// T(exp X): the largest multiplicative triad deviation.
inline double t_functional(const LogMatrix& x) {
  return std::exp(max_triad_deviation(x));
}

inline double ci_objective(const LogMatrix& x) {
  double sum = 0.0;
  for (const auto& t : triads(x.order())) {
    const double s = x.triad_sum(t);
    sum += std::exp(s) + std::exp(-s);
  }
  return sum;
}

inline double threshold_transform(IndexKind kind, double alpha, int n,
                                  const RandomIndexTable& ri) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::ThresholdOutOfRange,
                "threshold must be a finite value >= 0");
  switch (kind) {
    case IndexKind::CR: return n + ri.at(n) * (n - 1) * alpha;
    case IndexKind::CM:
      if (alpha >= 1.0)
        throw Error(ErrorCode::ThresholdOutOfRange, "CM threshold must be below 1");
      return std::log(1.0 / (1.0 - alpha));
    case IndexKind::CI: return (alpha + 2.0) * static_cast<double>(triad_count(n));
  }
  return 0.0;
}

/// Inverse of threshold_transform: objective units back to index units.
inline double index_from_objective(IndexKind kind, double objective, int n,
                                   const RandomIndexTable& ri) {
  switch (kind) {
    case IndexKind::CR:
      return std::max(0.0, (objective - n) / (ri.at(n) * (n - 1)));
    case IndexKind::CM: return std::max(0.0, 1.0 - std::exp(-objective));
    case IndexKind::CI:
      return std::max(0.0, objective / static_cast<double>(triad_count(n)) - 2.0);
  }
  return 0.0;
}

/// Documented acceptance presets: the ten percent rule and its refinements
/// for small orders (CR_3 <= 0.05, CR_4 <= 0.08).
inline double cr_threshold_preset(int n) {
  if (n == 3) return 0.05;
  if (n == 4) return 0.08;
  return 0.10;
}

// ---------------------------------------------------------------------------
// Random index estimation

/// The 17-point ratio scale 1/9, 1/8, ..., 1/2, 1, 2, ..., 9.
inline const std::array<double, 17>& saaty_scale() {
  static const std::array<double, 17> scale = [] {
    std::array<double, 17> s{};
    for (int v = 9; v >= 2; --v) s[static_cast<std::size_t>(9 - v)] = 1.0 / v;
    s[8] = 1.0;
    for (int v = 2; v <= 9; ++v) s[static_cast<std::size_t>(7 + v)] = v;
    return s;
  }();
  return scale;
}

/// SplitMix64 (Steele, Lea, Flood 2014). Portable, fully specified 64-bit
/// generator; used with per-sample seeding so streams do not depend on how
/// the sample range is split across threads.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by Lemire's multiply-shift.
  std::uint32_t below(std::uint32_t bound) {
    const auto wide = static_cast<unsigned __int128>(next()) * bound;
    return static_cast<std::uint32_t>(wide >> 64);
  }

  /// Stream for sample `index` under `seed`: state = mix(seed) ^ mix(index+1).
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 a(seed);
    SplitMix64 b(index + 1);
    return SplitMix64(a.next() ^ b.next());
  }

 private:
  std::uint64_t state_;
};

/// Random matrix whose upper-triangle cells are drawn independently and
/// uniformly from the 17-point scale, row-major.
inline ComparisonMatrix random_scale_matrix(int n, SplitMix64& rng) {
  const auto& scale = saaty_scale();
  std::vector<double> up(static_cast<std::size_t>(upper_count(n)));
  for (double& v : up) v = scale[rng.below(17)];
  return ComparisonMatrix::from_upper(n, up);
}

inline ComparisonMatrix random_scale_matrix(int n, std::uint64_t seed,
                                            std::uint64_t sample) {
  auto rng = SplitMix64::stream(seed, sample);
  return random_scale_matrix(n, rng);
}

/// Monte Carlo estimate of RI_n = (mean lambda_max - n) / (n - 1).
/// Deterministic in (n, samples, seed) for any thread count.
inline double estimate_ri(int n, std::uint64_t samples, std::uint64_t seed,
                          unsigned threads = 1) {
  if (n < 3)
    throw Error(ErrorCode::OrderTooSmall,
                "matrix order must be >= 3, got " + std::to_string(n));
  if (samples == 0)
    throw Error(ErrorCode::InadmissibleQuery, "sample count must be positive");
  std::vector<double> contrib(samples);
  auto work = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t s = begin; s < end; ++s) {
      const auto a = random_scale_matrix(n, seed, s);
      contrib[s] = (perron(a.data()).lambda - n) / (n - 1);
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    work(0, samples);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (samples + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::uint64_t b = t * chunk;
      const std::uint64_t e = std::min<std::uint64_t>(samples, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  double sum = 0.0;
  for (double c : contrib) sum += c;
  return sum / static_cast<double>(samples);
}

}  // namespace pcmr
