#include <doctest.h>

#include <sstream>

#include "ews/bench.hpp"
#include "ews/simulation.hpp"
#include "ews/stream.hpp"
#include "ews/trace_io.hpp"
#include "../support.hpp"

using namespace ews;

namespace {

const Design& design() { return ews::testing::reactor_design(); }

std::vector<Json> run_lines(const std::string& input, int* rc = nullptr, MonitorOptions opts = {}) {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run_monitor_stdin(design(), in, out, err, opts);
  if (rc) *rc = code;
  std::vector<Json> lines;
  std::istringstream res(out.str());
  for (std::string l; std::getline(res, l);) lines.push_back(Json::parse(l));
  return lines;
}

}  // namespace

TEST_CASE("empty input ends cleanly") {
  int rc = -1;
  CHECK(run_lines("", &rc).empty());
  CHECK(rc == 0);
  CHECK(run_lines("\n  \n", &rc).empty());
  CHECK(rc == 0);
}

TEST_CASE("bad records produce error lines and the stream continues") {
  int rc = -1;
  const auto lines = run_lines(
      "{\"k\":1,\"x_hat\":[1,2,3],\"integrator\":[0]}\n"
      "not json\n"
      "{\"k\":2,\"x_hat\":[16.5,0.1],\"integrator\":[0.3]}\n"
      "{\"k\":3,\"x_hat\":[16.5,\"a\"],\"integrator\":[0.3]}\n"
      "{\"x_hat\":[16.5,0.1],\"integrator\":[0.3]}\n",
      &rc);
  CHECK(rc == 0);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0]["line"] == 1);
  const std::string arity = lines[0]["error"];
  CHECK(arity.find("n=2") != std::string::npos);
  CHECK(arity.find("p=1") != std::string::npos);
  CHECK(lines[1]["line"] == 2);
  CHECK(lines[2]["k"] == 2);
  CHECK(lines[2].contains("susp"));
  CHECK(lines[3].contains("error"));
  CHECK(lines[4].contains("error"));
}

TEST_CASE("report lines carry every field") {
  const auto [x, st] = equilibrium(design().model, design().ctrl, 0);
  SimRecord rec;
  rec.k = 12;
  rec.x_hat = x;
  rec.integrator = st.integrator;
  const Json j = Json::parse(handle_record_line(design(), stream_record_line(rec), 1));
  for (const char* key : {"k", "l_hat", "feas", "prox", "susp", "warning", "wall_time_us"}) {
    CHECK(j.contains(key));
  }
  const auto rep = suspicion_step(design().ews, design().model, design().ctrl, x, st, 12);
  CHECK(j["susp"].get<double>() == rep.susp);
  CHECK(j["warning"] == to_string(rep.warning));
}

TEST_CASE("replaying simulation records reproduces SUSP bit for bit") {
  auto spec = ews::testing::reactor_config().attack;
  AttackRuntime rt(*spec, design().model, design().ctrl, design().kalman.sigma_r,
                   design().detector.beta, attack_seed(2));
  const auto trace = simulate_closed_loop(design().model, design().ctrl, design().kalman,
                                          design().detector, &rt, &design().ews, 1200, 2);
  std::string input;
  for (const auto& r : trace.records) input += stream_record_line(r) + "\n";
  const auto lines = run_lines(input);
  REQUIRE(lines.size() == trace.records.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    CHECK(lines[i]["susp"].get<double>() == trace.records[i].susp);
    CHECK(lines[i]["warning"] == to_string(trace.records[i].warning));
  }
}

TEST_CASE("coalescing never reorders and keeps the last record") {
  std::string input;
  for (int k = 0; k < 200; ++k) {
    input += "{\"k\":" + std::to_string(k) + ",\"x_hat\":[16.5,0.1],\"integrator\":[0.3]}\n";
  }
  MonitorOptions opts;
  opts.coalesce = true;
  const auto lines = run_lines(input, nullptr, opts);
  REQUIRE_FALSE(lines.empty());
  CHECK(lines.back()["k"] == 199);
  for (size_t i = 1; i < lines.size(); ++i) CHECK(lines[i]["k"] > lines[i - 1]["k"]);
}

TEST_CASE("source failures return the source exit code") {
  std::ostringstream out, err;
  int calls = 0;
  LineSource failing = [&](std::string& line) {
    if (calls++ == 0) {
      line = "{\"k\":0,\"x_hat\":[16.5,0.1],\"integrator\":[0.3]}";
      return true;
    }
    throw SourceError("connection reset");
  };
  CHECK(run_monitor(design(), failing, out, err) == 5);
  CHECK(err.str().find("connection reset") != std::string::npos);
  CHECK(out.str().find("\"k\":0") != std::string::npos);
}

TEST_CASE("bench produces one row per cell") {
  const auto cells = run_bench(design(), {1, 2}, {10, 20}, 2);
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].constraints == 1);
  CHECK(cells[1].K == 20);
  for (const auto& c : cells) {
    CHECK(c.mean_seconds > 0.0);
    CHECK(c.max_seconds >= c.mean_seconds);
  }
  const std::string csv = bench_csv(cells);
  CHECK(csv.rfind("constraints,K,repetitions,mean_seconds,max_seconds\n", 0) == 0);
  const auto [x, st] = equilibrium(design().model, design().ctrl, 0);
  const auto su = random_halfspaces(20, x, design().reach.Pi, 3);
  for (const auto& h : su) {
    CHECK(h.normal.norm() == doctest::Approx(1.0));
    CHECK(signed_distance(Ellipsoid<double>(x, design().reach.Pi), h) > 0.0);
  }
}
