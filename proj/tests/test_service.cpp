#include <gtest/gtest.h>

#include "support.hpp"
// after Eigen, see http.hpp
#include "pcmr/http.hpp"

#include <thread>

using namespace pcmr;
using namespace pcmr::testing;
using nlohmann::json;

namespace {

json body_with(const ComparisonMatrix& a) { return {{"matrix", upper_json(a)}}; }

std::string dump(const json& j) { return j.dump(); }

}  // namespace

TEST(Evaluate, Table1) {
  const Service svc;
  const auto r = svc.evaluate(dump(body_with(table1())));
  ASSERT_EQ(r.status, 200);
  EXPECT_NEAR(r.body["indices"]["CR"]["value"].get<double>(), 0.0732, 5e-5);
  EXPECT_NEAR(r.body["indices"]["CR"]["lambda_max"].get<double>(), 6.4536, 5e-5);
  EXPECT_FALSE(r.body["consistent"].get<bool>());
  EXPECT_EQ(r.body["worst_triads"].size(), 3u);
  EXPECT_EQ(r.body["n"], 6);
}

TEST(Evaluate, AllOnesIsZero) {
  const auto r = Service().evaluate(dump(json{{"matrix", dense_json(all_ones(4))}}));
  ASSERT_EQ(r.status, 200);
  for (const char* k : {"CR", "CM", "CI"}) EXPECT_EQ(r.body["indices"][k]["value"], 0.0);
  EXPECT_TRUE(r.body["consistent"].get<bool>());
}

TEST(Evaluate, NonPositiveEntry) {
  const auto r = Service().evaluate(R"({"matrix": [[1,0,1],[1,1,1],[1,1,1]]})");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["error"]["code"], "NonPositiveEntry");
  EXPECT_EQ(r.body["error"]["row"], 1);
  EXPECT_EQ(r.body["error"]["col"], 2);
}

TEST(Evaluate, MalformedBody) {
  EXPECT_EQ(Service().evaluate("{nope").status, 400);
  EXPECT_EQ(Service().evaluate("[1,2]").status, 400);
  EXPECT_EQ(Service().evaluate("{}").status, 400);
}

TEST(Evaluate, RiOverrideAndMissing) {
  auto b = body_with(table1());
  b["ri"] = {{"6", 1.0}};
  const auto r = Service().evaluate(dump(b));
  ASSERT_EQ(r.status, 200);
  EXPECT_NEAR(r.body["indices"]["CR"]["value"].get<double>(), 0.0732 * 1.24, 1e-4);
  b["ri"] = {{"5", 1.0}};
  const auto missing = Service().evaluate(dump(b));
  EXPECT_EQ(missing.status, 422);
  EXPECT_EQ(missing.body["error"]["code"], "MissingRandomIndex");
}

TEST(Evaluate, MatchesDirectCallsBitForBit) {
  std::mt19937_64 rng(41);
  const auto ri = RandomIndexTable::saaty();
  for (int rep = 0; rep < 10; ++rep) {
    const auto a = from_log(LogMatrix::from_upper(5, random_log_upper(5, rng, 2.0)));
    const auto r = Service().evaluate(dump(body_with(a)));
    ASSERT_EQ(r.status, 200);
    for (auto k : kAllIndexKinds)
      EXPECT_EQ(r.body["indices"][std::string(to_string(k))], to_json(evaluate(k, a, ri)));
  }
}

TEST(Reduce, ExchangedA13) {
  auto b = body_with(table1_a13_swapped());
  b["index"] = "CR";
  b["threshold"] = 0.1;
  b["enumerate_all"] = true;
  const auto r = Service().reduce(dump(b));
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["l_star"], 1);
  ASSERT_EQ(r.body["solutions"].size(), 1u);
  EXPECT_EQ(r.body["solutions"][0]["positions"], json::parse("[[1,3]]"));
  EXPECT_FALSE(r.body["stats"].contains("wall_seconds"));
}

TEST(Reduce, MatchesLibraryResult) {
  auto b = body_with(table1_a13_is_2());
  b["threshold"] = 0.1;
  b["enumerate_all"] = true;
  const auto r = Service().reduce(dump(b));
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body,
            to_json(enumerate_optimal({table1_a13_is_2(), IndexKind::CR, MinChanges{0.1}})));
}

TEST(Reduce, BudgetZeroGivesCurrentValue) {
  auto b = body_with(table1_a13_swapped());
  b["budget"] = 0;
  b["index"] = "CI";
  const auto r = Service().reduce(dump(b));
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["alpha_opt"].get<double>(), ci(table1_a13_swapped()).value);
}

TEST(Reduce, RequestErrors) {
  const Service svc;
  auto b = body_with(table1());
  EXPECT_EQ(svc.reduce(dump(b)).status, 400);  // neither mode
  b["threshold"] = 0.1;
  b["budget"] = 1;
  EXPECT_EQ(svc.reduce(dump(b)).status, 400);  // both
  b.erase("budget");
  b["index"] = "XY";
  EXPECT_EQ(svc.reduce(dump(b)).status, 400);
  b["index"] = "CM";
  b["threshold"] = 1.5;
  const auto r = svc.reduce(dump(b));
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["error"]["code"], "ThresholdOutOfRange");
  b["threshold"] = 0.1;
  b["bound"] = 5;
  EXPECT_EQ(svc.reduce(dump(b)).status, 422);
  b.erase("threshold");
  b.erase("bound");
  b["budget"] = 1.5;
  EXPECT_EQ(svc.reduce(dump(b)).status, 400);
}

TEST(Reduce, WorkBudgetIs413) {
  ServiceConfig cfg;
  cfg.work_budget = 10;
  const Service svc(cfg);
  auto b = body_with(table1_a13_swapped());
  b["threshold"] = 0.1;
  const auto r = svc.reduce(dump(b));
  EXPECT_EQ(r.status, 413);
  EXPECT_EQ(r.body["error"]["code"], "WorkBudgetExceeded");
  EXPECT_EQ(r.body["error"]["estimate"], 16);
  b.erase("threshold");
  b["budget"] = 2;
  EXPECT_EQ(svc.reduce(dump(b)).status, 413);
}

TEST(Reduce, TimeoutIs504) {
  ServiceConfig cfg;
  cfg.timeout_secs = 0.0;
  auto b = body_with(table1_a13_swapped());
  b["threshold"] = 0.1;
  const auto r = Service(cfg).reduce(dump(b));
  EXPECT_EQ(r.status, 504);
  EXPECT_EQ(r.body["error"]["code"], "Timeout");
}

TEST(WhatIf, UndoingTheExchangeRestoresTable1) {
  auto b = body_with(table1_a13_swapped());
  b["edits"] = json::parse(R"([{"i":1,"j":3,"value":8}])");
  const auto r = Service().whatif(dump(b));
  ASSERT_EQ(r.status, 200);
  EXPECT_NEAR(r.body["indices"]["CR"]["value"].get<double>(), 0.0732, 5e-5);
  EXPECT_NEAR(r.body["original"]["indices"]["CR"]["value"].get<double>(), 0.58, 5e-4);
  EXPECT_LT(r.body["delta"]["CR"].get<double>(), -0.5);
  EXPECT_EQ(matrix_from_json(r.body["matrix"]), table1());
  EXPECT_EQ(r.body["suggestions"]["l_star"], 0);
}

TEST(WhatIf, NoEditsMatchesEvaluate) {
  auto b = body_with(table1_a13_swapped());
  b["edits"] = json::array();
  const Service svc;
  const auto w = svc.whatif(dump(b));
  const auto e = svc.evaluate(dump(body_with(table1_a13_swapped())));
  ASSERT_EQ(w.status, 200);
  EXPECT_EQ(w.body["indices"], e.body["indices"]);
  EXPECT_EQ(w.body["delta"]["CR"], 0.0);
  EXPECT_EQ(w.body["suggestions"]["solutions"][0]["positions"], json::parse("[[1,3]]"));
}

TEST(WhatIf, EditOutOfBounds) {
  const Service svc;
  auto b = body_with(table1());
  b["edits"] = json::parse(R"([{"i":1,"j":2,"value":10}])");
  auto r = svc.whatif(dump(b));
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["error"]["code"], "EditOutOfBounds");
  b["edits"] = json::parse(R"([{"i":3,"j":2,"value":2}])");
  r = svc.whatif(dump(b));
  EXPECT_EQ(r.body["error"]["code"], "EditOutOfBounds");
  b["edits"] = json::parse(R"([{"i":1,"j":2,"value":10}])");
  b["bound"] = 20;
  b["matrix"] = upper_json(all_ones(3));
  EXPECT_EQ(svc.whatif(dump(b)).status, 200);
}

TEST(WhatIf, SuggestionErrorsAreReportedInline) {
  ServiceConfig cfg;
  cfg.work_budget = 3;
  auto b = body_with(table1_a13_swapped());
  const auto r = Service(cfg).whatif(dump(b));
  ASSERT_EQ(r.status, 200);
  EXPECT_TRUE(r.body["suggestions"].is_null());
  EXPECT_EQ(r.body["suggestions_error"]["code"], "WorkBudgetExceeded");
}

TEST(Health, RepeatableAndVersioned) {
  const Service svc;
  const auto a = svc.health();
  EXPECT_EQ(a.status, 200);
  EXPECT_EQ(a.body["status"], "ok");
  EXPECT_FALSE(a.body["version"].get<std::string>().empty());
  EXPECT_EQ(a.body.dump(), svc.health().body.dump());
  ServiceConfig cfg;
  cfg.ri = RandomIndexTable({{3, 0.52}});
  EXPECT_NE(Service(cfg).health().body["ri_table_hash"], a.body["ri_table_hash"]);
}

TEST(Http, RoutesOverLoopback) {
  httplib::Server server;
  const Service svc;
  mount(server, svc);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto h = client.Get("/api/v1/health");
  ASSERT_TRUE(h);
  EXPECT_EQ(h->status, 200);
  EXPECT_EQ(h->get_header_value("Access-Control-Allow-Origin"), "*");
  EXPECT_EQ(json::parse(h->body), svc.health().body);

  const auto req = dump(body_with(table1()));
  auto e = client.Post("/api/v1/evaluate", req, "application/json");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->status, 200);
  EXPECT_EQ(json::parse(e->body), svc.evaluate(req).body);

  auto bad = client.Post("/api/v1/reduce", "{", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  auto pre = client.Options("/api/v1/reduce");
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);

  server.stop();
  t.join();
}
