#pragma once

// JSON wire format shared by the CLI (--json) and the HTTP service.
//
// Positions are [i, j] pairs and triads [i, j, k] triples, 1-based.
// Matrices go out in upper-triangle form {"n": .., "upper": [..]}.
// Numbers are written at full double precision; nothing is rounded here.

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "pcmr/indices.hpp"
#include "pcmr/io.hpp"
#include "pcmr/reduce.hpp"

namespace pcmr {

inline nlohmann::json position_json(Position p) { return {p.i, p.j}; }

inline nlohmann::json positions_json(const std::vector<Position>& ps) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : ps) out.push_back(position_json(p));
  return out;
}

inline nlohmann::json triad_json(TriadIndex t) { return {t.i, t.j, t.k}; }

inline nlohmann::json to_json(const IndexReport& r) {
  nlohmann::json j;
  j["index"] = std::string(to_string(r.kind));
  j["value"] = r.value;
  j["consistent"] = r.consistent();
  switch (r.kind) {
    case IndexKind::CR:
      j["lambda_max"] = r.lambda_max;
      j["perron_vector"] = std::vector<double>(
          r.perron_vector.data(), r.perron_vector.data() + r.perron_vector.size());
      break;
    case IndexKind::CM:
      j["z_opt"] = r.z_opt;
      j["worst_triad"] = triad_json(r.worst_triad);
      break;
    case IndexKind::CI: {
      nlohmann::json dets = nlohmann::json::array();
      for (const auto& d : r.determinants)
        dets.push_back({{"triad", triad_json(d.triad)}, {"det", d.det}});
      j["determinants"] = std::move(dets);
      break;
    }
  }
  return j;
}

struct JsonOptions {
  bool wall_time = false;  // off by default so that output is reproducible
};

inline nlohmann::json to_json(const Witness& w) {
  nlohmann::json j;
  j["positions"] = positions_json(w.positions);
  j["changed"] = positions_json(w.changed);
  j["value"] = w.value;
  j["objective"] = w.objective;
  j["status"] = std::string(to_string(w.status));
  j["matrix"] = upper_json(w.matrix);
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& p : w.positions)
    cells.push_back({{"i", p.i}, {"j", p.j}, {"value", w.matrix.at(p)}});
  j["cells"] = std::move(cells);
  if (w.rounded) {
    nlohmann::json r;
    r["matrix"] = upper_json(*w.rounded);
    r["value"] = w.rounded_value;
    if (w.rounded_acceptable) r["acceptable"] = *w.rounded_acceptable;
    j["rounded"] = std::move(r);
  }
  return j;
}

inline nlohmann::json to_json(const ReductionResult& r, const JsonOptions& o = {}) {
  nlohmann::json j;
  j["index"] = std::string(to_string(r.kind));
  if (const auto* mc = std::get_if<MinChanges>(&r.mode)) {
    j["mode"] = "min_changes";
    j["threshold"] = mc->alpha;
    j["enumerated"] = r.enumerated;
    j["l_star"] = r.l_star;
  } else {
    j["mode"] = "min_index";
    j["budget"] = std::get<MinIndex>(r.mode).budget;
    j["alpha_opt"] = r.alpha_opt;
  }
  j["initial_value"] = r.initial_value;
  nlohmann::json sols = nlohmann::json::array();
  for (const auto& w : r.solutions) sols.push_back(to_json(w));
  j["solutions"] = std::move(sols);
  nlohmann::json stats;
  stats["subproblems"] = r.stats.subproblems;
  stats["solver_limits"] = r.stats.solver_limits;
  nlohmann::json ties = nlohmann::json::array();
  for (const auto& t : r.stats.ties) ties.push_back(positions_json(t));
  stats["ties"] = std::move(ties);
  if (o.wall_time) stats["wall_seconds"] = r.stats.wall_seconds;
  j["stats"] = std::move(stats);
  return j;
}

inline nlohmann::json stats_json(const ReductionStats& s) {
  nlohmann::json j;
  j["subproblems"] = s.subproblems;
  j["solver_limits"] = s.solver_limits;
  j["wall_seconds"] = s.wall_seconds;
  return j;
}

/// {"code": .., "message": .., "row": .., "col": ..}; row/col only when set.
inline nlohmann::json error_json(const Error& e) {
  nlohmann::json j;
  j["code"] = std::string(to_string(e.code()));
  j["message"] = e.what();
  if (e.row() > 0) j["row"] = e.row();
  if (e.col() > 0) j["col"] = e.col();
  return j;
}

}  // namespace pcmr
