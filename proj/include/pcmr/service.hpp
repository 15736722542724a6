#pragma once

// Stateless request handlers behind the HTTP API. Each takes the request
// body as text and returns a status code plus a JSON body, so they can be
// exercised without a socket; http.hpp binds them to routes.
//
//   POST /api/v1/evaluate   {"matrix": M, "ri"?: {...}}
//   POST /api/v1/reduce     {"matrix": M, "index": "CR", "threshold": 0.1 | "budget": K,
//                            "bound"?: 9, "enumerate_all"?: false,
//                            "round_to_scale"?: false, "ri"?: {...}}
//   POST /api/v1/whatif     {"matrix": M, "edits": [{"i":1,"j":3,"value":8}],
//                            "index"?: "CR", "threshold"?: 0.1, "bound"?: 9,
//                            "enumerate_all"?: false, "ri"?: {...}}
//   GET  /api/v1/health
//
// M is either the dense array of rows or {"n": .., "upper": [..]}.
// Errors come back as {"error": {"code", "message", "row"?, "col"?}}.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "pcmr/indices.hpp"
#include "pcmr/io.hpp"
#include "pcmr/json.hpp"
#include "pcmr/reduce.hpp"

#ifndef PCMR_VERSION
#define PCMR_VERSION "1.0.0"
#endif

namespace pcmr {

struct ServiceConfig {
  RandomIndexTable ri = RandomIndexTable::saaty();
  std::uint64_t work_budget = 200000;
  double timeout_secs = 60.0;
  std::string allow_origin = "*";
  unsigned threads = 1;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// HTTP status for an engine error.
inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingRandomIndex:
    case ErrorCode::ThresholdOutOfRange:
    case ErrorCode::InadmissibleQuery:
    case ErrorCode::InadmissibleSpec:
      return 422;
    case ErrorCode::WorkBudgetExceeded: return 413;
    case ErrorCode::Timeout: return 504;
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::BranchLimit:
      return 500;
    default: return 400;
  }
}

class Service {
 public:
  explicit Service(ServiceConfig config = {}) : config_(std::move(config)) {}

  const ServiceConfig& config() const noexcept { return config_; }

  Response evaluate(std::string_view body) const {
    return guarded([&] {
      const auto req = parse_body(body);
      const auto a = matrix_of(req);
      return Response{200, evaluation(a, ri_of(req))};
    });
  }

  Response reduce(std::string_view body) const {
    return guarded([&] {
      const auto req = parse_body(body);
      auto q = query_of(req, matrix_of(req));
      const bool has_threshold = req.contains("threshold");
      const bool has_budget = req.contains("budget");
      if (has_threshold == has_budget)
        throw Error(ErrorCode::ParseError,
                    "give exactly one of \"threshold\" and \"budget\"");
      if (has_threshold) {
        q.mode = MinChanges{number(req, "threshold")};
      } else {
        const auto& k = req["budget"];
        if (!k.is_number_integer())
          throw Error(ErrorCode::ParseError, "\"budget\" must be an integer");
        q.mode = MinIndex{k.get<int>()};
      }
      return run_reduction(q, flag(req, "enumerate_all"), flag(req, "round_to_scale"));
    });
  }

  Response whatif(std::string_view body) const {
    return guarded([&] {
      const auto req = parse_body(body);
      const auto original = matrix_of(req);
      const ScaleBound bound(req.contains("bound") ? number(req, "bound") : 9.0);
      const auto edited = apply_edits(original, req, bound);
      const auto ri = ri_of(req);

      nlohmann::json out;
      out["matrix"] = dense_json(edited);
      out["upper"] = upper_json(edited);
      const auto before = evaluation(original, ri);
      const auto after = evaluation(edited, ri);
      out["original"] = before;
      out["indices"] = after["indices"];
      out["consistent"] = after["consistent"];
      out["worst_triads"] = after["worst_triads"];
      nlohmann::json delta;
      for (auto k : kAllIndexKinds) {
        const std::string key(to_string(k));
        delta[key] = after["indices"][key]["value"].get<double>() -
                     before["indices"][key]["value"].get<double>();
      }
      out["delta"] = std::move(delta);

      auto q = query_of(req, edited);
      q.mode = MinChanges{req.contains("threshold") ? number(req, "threshold") : 0.1};
      const auto sug = run_reduction(q, flag(req, "enumerate_all"), flag(req, "round_to_scale"));
      if (sug.status == 200) {
        out["suggestions"] = sug.body;
      } else if (sug.status == 413 || sug.status == 504) {
        out["suggestions"] = nullptr;
        out["suggestions_error"] = sug.body["error"];
      } else {
        return sug;
      }
      return Response{200, std::move(out)};
    });
  }

  Response health() const {
    nlohmann::json j;
    j["status"] = "ok";
    j["version"] = PCMR_VERSION;
    j["ri_table_hash"] = config_.ri.hash();
    j["ri_table"] = config_.ri.to_json();
    return {200, std::move(j)};
  }

 private:
  template <class F>
  static Response guarded(F&& f) {
    try {
      return f();
    } catch (const ReductionTimeout& e) {
      nlohmann::json j{{"error", error_json(e)}, {"stats", stats_json(e.stats())}};
      return {504, std::move(j)};
    } catch (const WorkBudgetError& e) {
      nlohmann::json j{{"error", error_json(e)}};
      j["error"]["estimate"] = e.estimate();
      return {413, std::move(j)};
    } catch (const Error& e) {
      return {http_status(e.code()), {{"error", error_json(e)}}};
    } catch (const nlohmann::json::exception& e) {
      return {400, {{"error", {{"code", "ParseError"}, {"message", e.what()}}}}};
    }
  }

  static nlohmann::json parse_body(std::string_view body) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
    return j;
  }

  static ComparisonMatrix matrix_of(const nlohmann::json& req) {
    if (!req.contains("matrix")) throw Error(ErrorCode::ParseError, "missing \"matrix\"");
    return matrix_from_json(req["matrix"]);
  }

  static double number(const nlohmann::json& req, const char* key) {
    const auto& v = req[key];
    if (!v.is_number())
      throw Error(ErrorCode::ParseError, std::string("\"") + key + "\" must be a number");
    return v.get<double>();
  }

  static bool flag(const nlohmann::json& req, const char* key) {
    if (!req.contains(key)) return false;
    if (!req[key].is_boolean())
      throw Error(ErrorCode::ParseError, std::string("\"") + key + "\" must be a boolean");
    return req[key].get<bool>();
  }

  RandomIndexTable ri_of(const nlohmann::json& req) const {
    return req.contains("ri") ? RandomIndexTable::from_json(req["ri"]) : config_.ri;
  }

  ReductionQuery query_of(const nlohmann::json& req, const ComparisonMatrix& a) const {
    ReductionQuery q{a};
    if (req.contains("index")) {
      const auto& v = req["index"];
      const auto kind = v.is_string() ? parse_index_kind(v.get<std::string>()) : std::nullopt;
      if (!kind) throw Error(ErrorCode::ParseError, "\"index\" must be one of CR, CM, CI");
      q.kind = *kind;
    }
    if (req.contains("bound")) q.bound = ScaleBound(number(req, "bound"));
    q.ri = ri_of(req);
    return q;
  }

  static nlohmann::json evaluation(const ComparisonMatrix& a, const RandomIndexTable& ri) {
    nlohmann::json j;
    j["n"] = a.order();
    nlohmann::json idx;
    for (auto k : kAllIndexKinds) idx[std::string(to_string(k))] = to_json(pcmr::evaluate(k, a, ri));
    j["indices"] = std::move(idx);
    j["consistent"] = is_consistent(a);

    // triads ranked by |log triad sum|, worst first
    const auto x = to_log(a);
    auto ts = triads(a.order());
    std::stable_sort(ts.begin(), ts.end(), [&](TriadIndex p, TriadIndex q) {
      return std::abs(x.triad_sum(p)) > std::abs(x.triad_sum(q));
    });
    nlohmann::json worst = nlohmann::json::array();
    for (std::size_t s = 0; s < std::min<std::size_t>(3, ts.size()); ++s) {
      const auto t = ts[s];
      worst.push_back({{"triad", triad_json(t)},
                       {"deviation", std::abs(x.triad_sum(t))},
                       {"cm", cm_triad(a(t.i - 1, t.j - 1), a(t.i - 1, t.k - 1),
                                       a(t.j - 1, t.k - 1)).cm},
                       {"det", triad_determinant(a, t)}});
    }
    j["worst_triads"] = std::move(worst);
    return j;
  }

  static ComparisonMatrix apply_edits(const ComparisonMatrix& a, const nlohmann::json& req,
                                      const ScaleBound& bound) {
    if (!req.contains("edits")) return a;
    const auto& edits = req["edits"];
    if (!edits.is_array()) throw Error(ErrorCode::ParseError, "\"edits\" must be an array");
    const int n = a.order();
    auto up = a.upper();
    for (const auto& e : edits) {
      if (!e.is_object() || !e.contains("i") || !e.contains("j") || !e.contains("value") ||
          !e["i"].is_number_integer() || !e["j"].is_number_integer() ||
          !e["value"].is_number())
        throw Error(ErrorCode::ParseError, "each edit needs integer \"i\", \"j\" and a \"value\"");
      const Position p{e["i"].get<int>(), e["j"].get<int>()};
      const double v = e["value"].get<double>();
      if (p.i < 1 || p.j > n || p.i >= p.j)
        throw Error(ErrorCode::EditOutOfBounds,
                    "edit " + to_string(p) + " is not an upper-triangle cell", p.i, p.j);
      if (!(v > 0.0) || !bound.admits(v))
        throw Error(ErrorCode::EditOutOfBounds,
                    "edit value for " + to_string(p) + " lies outside [1/M, M]", p.i, p.j);
      up[static_cast<std::size_t>(linear_index(p, n))] = v;
    }
    return ComparisonMatrix::from_upper(n, up);
  }

  Response run_reduction(const ReductionQuery& q, bool enumerate, bool round) const {
    return guarded([&] {
      ReduceOptions o;
      o.round_to_scale = round;
      o.work_budget = config_.work_budget;
      o.threads = config_.threads;
      o.deadline = std::chrono::steady_clock::now() +
                   std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                       std::chrono::duration<double>(config_.timeout_secs));
      if (std::holds_alternative<MinIndex>(q.mode)) {
        const auto est = estimate_work(q);
        if (o.work_budget && est > o.work_budget) throw WorkBudgetError(est, o.work_budget);
        return Response{200, to_json(min_index(q, o))};
      }
      const auto r = enumerate ? enumerate_optimal(q, o) : min_changes(q, o);
      return Response{200, to_json(r)};
    });
  }

  ServiceConfig config_;
};

}  // namespace pcmr
