#include <gtest/gtest.h>

#include "support.hpp"
#include "pcmr/http.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <string>
#include <thread>

using namespace pcmr;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& stdin_file = "") {
  std::string cmd = std::string(PCMR_CLI) + " " + args;
  if (!stdin_file.empty()) cmd += " < " + stdin_file;
  cmd += " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(PCMR_TEST_DATA) + "/" + name; }

int free_port() {
  const int fd = socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  socklen_t len = sizeof addr;
  bind(fd, reinterpret_cast<sockaddr*>(&addr), len);
  getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  close(fd);
  return ntohs(addr.sin_port);
}

bool first_line_is(const std::string& out, const std::string& line) {
  return out.substr(0, out.find('\n')) == line;
}

}  // namespace

TEST(Cli, EvaluateTable1) {
  const auto r = run("evaluate --index cr " + data("table1.csv"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "CR = 0.0732, lambda_max = 6.4536\n");
}

TEST(Cli, EvaluateConsistentIsZero) {
  const auto r = run("evaluate " + data("consistent3.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("CR = 0.0000"), std::string::npos);
  EXPECT_NE(r.out.find("CM = 0.0000"), std::string::npos);
  EXPECT_NE(r.out.find("CI = 0.0000"), std::string::npos);
  EXPECT_NE(r.out.find("consistent: yes"), std::string::npos);
}

TEST(Cli, StdinMatchesFile) {
  const auto a = run("evaluate --json " + data("table1.csv"));
  const auto b = run("evaluate --json -", data("table1.csv"));
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, MalformedCsvExitsTwo) {
  const std::string path = ::testing::TempDir() + "bad.csv";
  std::ofstream(path) << "n=3\n1,2,4\n1/2,1,x\n1/4,1/2,1\n";
  EXPECT_EQ(run("evaluate " + path).code, 2);
}

TEST(Cli, MissingFileExitsThree) {
  EXPECT_EQ(run("evaluate " + data("no_such_file.csv")).code, 3);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("evaluate").code, 2);
  EXPECT_EQ(run("reduce " + data("table1.csv") + " --index cr").code, 2);
  EXPECT_EQ(run("ri --n 6 --samples 0").code, 2);
  EXPECT_EQ(run("reduce " + data("table1.csv") + " --index xx --threshold 0.1").code, 2);
}

TEST(Cli, ReduceExchangedA13) {
  const auto r = run("reduce " + data("table1_a13_swapped.csv") + " --index cr --threshold 0.1 --all");
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(first_line_is(r.out, "L*=1; solutions: {(1,3)}")) << r.out;
}

TEST(Cli, ReduceAcceptableMatrix) {
  const auto r = run("reduce " + data("table1.csv") + " --index cr --threshold 0.1");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "L*=0\n");
}

TEST(Cli, ReduceJsonMatchesLibrary) {
  const auto r = run("reduce --json " + data("table1_a13_is_2.csv") +
                     " --index cr --threshold 0.1 --all");
  ASSERT_EQ(r.code, 0);
  const auto lib = enumerate_optimal(
      {pcmr::testing::table1_a13_is_2(), IndexKind::CR, MinChanges{0.1}});
  EXPECT_EQ(r.out, to_json(lib).dump(2) + "\n");
  EXPECT_EQ(r.out, run("reduce --json " + data("table1_a13_is_2.csv") +
                       " --index cr --threshold 0.1 --all")
                       .out);
}

TEST(Cli, MinimizeExamples) {
  auto r = run("minimize " + data("table1_a13_swapped.csv") + " --index cr --budget 1");
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(first_line_is(r.out, "alpha_opt = 0.0731 at {(1,3)}")) << r.out;
  r = run("minimize " + data("table1.csv") + " --index cm --budget 15");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("alpha_opt = 0.0000 at ", 0), 0u) << r.out;
  r = run("minimize --json " + data("table1.csv") + " --index ci --budget 0");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["alpha_opt"].get<double>(),
            ci(pcmr::testing::table1()).value);
}

TEST(Cli, RandomIndexIsReproducible) {
  const auto a = run("ri --n 6 --samples 20000 --seed 7");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, run("ri --n 6 --samples 20000 --seed 7").out);
  const auto j = json::parse(run("ri --n 6 --samples 20000 --seed 7 --json").out);
  EXPECT_NEAR(j["ri"].get<double>(), 1.24, 0.03);
}

TEST(Cli, ServeAnswersHealthProbe) {
  const int port = free_port();
  const std::string pidfile = ::testing::TempDir() + "serve.pid";
  const std::string cmd = std::string(PCMR_CLI) + " serve --host 127.0.0.1 --port " +
                          std::to_string(port) + " --ri-table " + data("ri_alt.json") +
                          " 2>/dev/null >/dev/null & echo $! > " + pidfile;
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  int pid = 0;
  std::ifstream(pidfile) >> pid;
  ASSERT_GT(pid, 0);

  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(2, 0);
  httplib::Result res;
  for (int attempt = 0; attempt < 100 && !res; ++attempt) {
    res = client.Get("/api/v1/health");
    if (!res) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto body = json::parse(res->body);
  std::ifstream ri_in(data("ri_alt.json"));
  EXPECT_EQ(body["ri_table_hash"], RandomIndexTable::from_json(json::parse(ri_in)).hash());
  EXPECT_EQ(body["version"], PCMR_VERSION);
  kill(pid, SIGTERM);
}

TEST(Cli, OccupiedPortExitsThree) {
  httplib::Server holder;
  const Service svc;
  mount(holder, svc);
  const int port = holder.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  EXPECT_EQ(run("serve --host 127.0.0.1 --port " + std::to_string(port)).code, 3);
  holder.stop();
}
