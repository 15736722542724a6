// pcmr: command-line front end.
//
//   pcmr evaluate <matrix> [--index cr|cm|ci|all]
//   pcmr reduce   <matrix> --index cr --threshold 0.1 [--all] [--bound 9]
//   pcmr minimize <matrix> --index cr --budget 1 [--bound 9]
//   pcmr ri       --n 6 --samples 100000 --seed 1
//   pcmr serve    [--port 8080] [--ri-table t.json] [--work-budget N] [--timeout-secs S]
//
// <matrix> is a file path or "-" for stdin. Exit status: 0 success,
// 2 bad input, 3 environment (files, sockets), 4 solver limit.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "pcmr/pcmr.hpp"
#include "pcmr/http.hpp"

namespace {

using namespace pcmr;

constexpr int kExitInput = 2;
constexpr int kExitEnvironment = 3;
constexpr int kExitSolver = 4;

struct EnvironmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::BranchLimit:
    case ErrorCode::Timeout:
    case ErrorCode::WorkBudgetExceeded:
      return kExitSolver;
    default: return kExitInput;
  }
}

std::string read_source(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EnvironmentError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ComparisonMatrix load_matrix(const std::string& path, const std::string& format) {
  const auto text = read_source(path);
  if (format == "auto") return parse_matrix(text);
  const auto f = parse_format_name(format);
  if (!f) throw Error(ErrorCode::ParseError, "unknown format \"" + format + "\"");
  return parse_matrix(text, *f);
}

RandomIndexTable load_ri(const std::string& path) {
  if (path.empty()) return RandomIndexTable::saaty();
  const auto text = read_source(path);
  try {
    return RandomIndexTable::from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("random index table: ") + e.what());
  }
}

IndexKind kind_of(const std::string& s) {
  const auto k = parse_index_kind(s);
  if (!k) throw Error(ErrorCode::ParseError, "unknown index \"" + s + "\"");
  return *k;
}

std::string fmt4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

void print_report(const IndexReport& r, int n) {
  switch (r.kind) {
    case IndexKind::CR:
      std::cout << "CR = " << fmt4(r.value) << ", lambda_max = " << fmt4(r.lambda_max) << '\n';
      break;
    case IndexKind::CM:
      std::cout << "CM = " << fmt4(r.value) << ", z_opt = " << fmt4(r.z_opt)
                << ", worst triad (" << r.worst_triad.i << ',' << r.worst_triad.j << ','
                << r.worst_triad.k << ")\n";
      break;
    case IndexKind::CI:
      std::cout << "CI = " << fmt4(r.value) << " over " << triad_count(n) << " triads\n";
      break;
  }
}

std::string set_text(const std::vector<Position>& ps) { return to_string(ps); }

void print_witness(const Witness& w, IndexKind kind) {
  std::cout << "  " << set_text(w.positions) << ':';
  for (const auto& p : w.positions)
    std::cout << " a(" << p.i << ',' << p.j << ") = " << fmt4(w.matrix.at(p)) << ';';
  std::cout << ' ' << to_string(kind) << " = " << fmt4(w.value) << '\n';
  if (w.rounded) {
    std::cout << "    rounded:";
    for (const auto& p : w.positions)
      std::cout << " a(" << p.i << ',' << p.j << ") = " << fmt4(w.rounded->at(p)) << ';';
    std::cout << ' ' << to_string(kind) << " = " << fmt4(w.rounded_value);
    if (w.rounded_acceptable)
      std::cout << (*w.rounded_acceptable ? " (acceptable)" : " (NOT acceptable)");
    std::cout << '\n';
  }
}

struct Common {
  std::string input;
  std::string format = "auto";
  std::string ri_table;
  bool json = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("matrix", c.input, "matrix file, or - for stdin")->required();
  cmd->add_option("--format", c.format, "auto, dense, upper or csv")
      ->check(CLI::IsMember({"auto", "dense", "upper", "csv"}));
  cmd->add_option("--ri-table", c.ri_table, "random index table (JSON map)");
  cmd->add_flag("--json", c.json, "JSON output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inconsistency indices and minimal repairs for pairwise comparison matrices"};
  app.set_version_flag("--version", PCMR_VERSION);
  app.require_subcommand(1);

  Common ev;
  std::string ev_index = "all";
  auto* evaluate_cmd = app.add_subcommand("evaluate", "compute CR, CM and CI");
  add_common(evaluate_cmd, ev);
  evaluate_cmd->add_option("--index", ev_index, "cr, cm, ci or all")
      ->check(CLI::IsMember({"cr", "cm", "ci", "all", "CR", "CM", "CI"}));

  Common rd;
  std::string rd_index = "cr";
  double threshold = 0.1;
  double rd_bound = 9.0;
  bool all = false, round = false, timing = false;
  unsigned threads = 1;
  auto* reduce_cmd = app.add_subcommand("reduce", "fewest changes to reach a threshold");
  add_common(reduce_cmd, rd);
  reduce_cmd->add_option("--index", rd_index, "cr, cm or ci")->required()
      ->check(CLI::IsMember({"cr", "cm", "ci", "CR", "CM", "CI"}));
  reduce_cmd->add_option("--threshold", threshold, "acceptance threshold alpha")->required();
  reduce_cmd->add_option("--bound", rd_bound, "scale bound M")->capture_default_str();
  reduce_cmd->add_flag("--all", all, "list every optimal set");
  reduce_cmd->add_flag("--round", round, "also round witnesses to the 1/9..9 scale");
  reduce_cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  reduce_cmd->add_flag("--timing", timing, "include wall time in JSON output");

  Common mn;
  std::string mn_index = "cr";
  int budget = 1;
  double mn_bound = 9.0;
  bool mn_round = false, mn_timing = false;
  unsigned mn_threads = 1;
  auto* minimize_cmd = app.add_subcommand("minimize", "lowest index with at most K changes");
  add_common(minimize_cmd, mn);
  minimize_cmd->add_option("--index", mn_index, "cr, cm or ci")->required()
      ->check(CLI::IsMember({"cr", "cm", "ci", "CR", "CM", "CI"}));
  minimize_cmd->add_option("--budget", budget, "K")->required()->check(CLI::NonNegativeNumber);
  minimize_cmd->add_option("--bound", mn_bound, "scale bound M")->capture_default_str();
  minimize_cmd->add_flag("--round", mn_round, "also round the witness to the 1/9..9 scale");
  minimize_cmd->add_option("--threads", mn_threads, "worker threads")->check(CLI::PositiveNumber);
  minimize_cmd->add_flag("--timing", mn_timing, "include wall time in JSON output");

  int ri_n = 6;
  std::uint64_t samples = 100000, seed = 1;
  unsigned ri_threads = 1;
  bool ri_json = false;
  auto* ri_cmd = app.add_subcommand("ri", "Monte Carlo random index");
  ri_cmd->add_option("--n", ri_n, "matrix order")->required()->check(CLI::Range(3, 64));
  ri_cmd->add_option("--samples", samples, "sample count")->check(CLI::PositiveNumber)
      ->capture_default_str();
  ri_cmd->add_option("--seed", seed, "seed")->capture_default_str();
  ri_cmd->add_option("--threads", ri_threads, "worker threads")->check(CLI::PositiveNumber);
  ri_cmd->add_flag("--json", ri_json, "JSON output");

  int port = 8080;
  std::string host = "0.0.0.0", sv_ri, origin = "*";
  std::uint64_t work_budget = 200000;
  double timeout_secs = 60.0;
  unsigned sv_threads = 1;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP JSON service");
  serve_cmd->add_option("--port", port, "TCP port")->capture_default_str();
  serve_cmd->add_option("--host", host, "bind address")->capture_default_str();
  serve_cmd->add_option("--ri-table", sv_ri, "random index table (JSON map)");
  serve_cmd->add_option("--work-budget", work_budget, "max subproblems per request")
      ->capture_default_str();
  serve_cmd->add_option("--timeout-secs", timeout_secs, "per-request time limit")
      ->check(CLI::PositiveNumber)->capture_default_str();
  serve_cmd->add_option("--allow-origin", origin, "CORS origin, empty to disable")
      ->capture_default_str();
  serve_cmd->add_option("--threads", sv_threads, "per-request worker threads")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*evaluate_cmd) {
      const auto a = load_matrix(ev.input, ev.format);
      const auto ri = load_ri(ev.ri_table);
      std::vector<IndexKind> kinds;
      if (ev_index == "all") kinds.assign(kAllIndexKinds.begin(), kAllIndexKinds.end());
      else kinds.push_back(kind_of(ev_index));
      if (ev.json) {
        nlohmann::json j;
        j["n"] = a.order();
        j["consistent"] = is_consistent(a);
        nlohmann::json idx;
        for (auto k : kinds) idx[std::string(to_string(k))] = to_json(evaluate(k, a, ri));
        j["indices"] = std::move(idx);
        print_json(j);
      } else {
        for (auto k : kinds) print_report(evaluate(k, a, ri), a.order());
        if (kinds.size() > 1) std::cout << "consistent: " << (is_consistent(a) ? "yes" : "no") << '\n';
      }
      return 0;
    }

    if (*reduce_cmd || *minimize_cmd) {
      const bool reducing = static_cast<bool>(*reduce_cmd);
      const Common& c = reducing ? rd : mn;
      ReductionQuery q{load_matrix(c.input, c.format)};
      q.kind = kind_of(reducing ? rd_index : mn_index);
      q.bound = ScaleBound(reducing ? rd_bound : mn_bound);
      q.ri = load_ri(c.ri_table);
      ReduceOptions o;
      o.round_to_scale = reducing ? round : mn_round;
      o.threads = reducing ? threads : mn_threads;
      ReductionResult r;
      if (reducing) {
        q.mode = MinChanges{threshold};
        r = all ? enumerate_optimal(q, o) : min_changes(q, o);
      } else {
        q.mode = MinIndex{budget};
        r = min_index(q, o);
      }
      if (c.json) {
        JsonOptions jo;
        jo.wall_time = reducing ? timing : mn_timing;
        print_json(to_json(r, jo));
      } else if (reducing) {
        std::cout << "L*=" << r.l_star;
        if (r.l_star > 0) {
          std::cout << "; solutions: ";
          for (std::size_t s = 0; s < r.solutions.size(); ++s)
            std::cout << (s ? ", " : "") << set_text(r.solutions[s].positions);
        }
        std::cout << '\n';
        if (r.l_star > 0)
          for (const auto& w : r.solutions) print_witness(w, q.kind);
      } else {
        const auto& w = r.solutions.front();
        std::cout << "alpha_opt = " << fmt4(r.alpha_opt) << " at " << set_text(w.positions)
                  << '\n';
        std::cout << to_string(q.kind) << ": " << fmt4(r.initial_value) << " -> "
                  << fmt4(r.alpha_opt) << '\n';
        if (!w.positions.empty()) print_witness(w, q.kind);
      }
      if (r.stats.solver_limits > 0) {
        std::cerr << "warning: " << r.stats.solver_limits
                  << " subproblem(s) stopped at the iteration limit\n";
        return kExitSolver;
      }
      return 0;
    }

    if (*ri_cmd) {
      const double v = estimate_ri(ri_n, samples, seed, ri_threads);
      if (ri_json) {
        print_json({{"n", ri_n}, {"samples", samples}, {"seed", seed}, {"ri", v}});
      } else {
        std::cout << "RI_" << ri_n << " = " << fmt4(v) << " (" << samples << " samples, seed "
                  << seed << ")\n";
      }
      return 0;
    }

    if (*serve_cmd) {
      ServiceConfig cfg;
      cfg.ri = load_ri(sv_ri);
      cfg.work_budget = work_budget;
      cfg.timeout_secs = timeout_secs;
      cfg.allow_origin = origin;
      cfg.threads = sv_threads;
      const Service service(cfg);
      httplib::Server server;
      mount(server, service);
      if (!server.bind_to_port(host, port)) {
        std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
        return kExitEnvironment;
      }
      std::cerr << "listening on " << host << ':' << port << std::endl;
      return server.listen_after_bind() ? 0 : kExitEnvironment;
    }
  } catch (const EnvironmentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitEnvironment;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code(e.code());
  }
  return 0;
}
