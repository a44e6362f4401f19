#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ontic_nogo/cli.hpp"
#include "ontic_nogo/pipeline.hpp"
#include "ontic_nogo/report.hpp"

using namespace ontic_nogo::cli;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ontic-nogo");
  std::vector<const char *> argv;
  for (const auto &a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string &name) {
  return std::filesystem::temp_directory_path() / ("ontic_nogo_test_" + name);
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("argument-one with the assumption reports certificates") {
  const auto r = cli({"argument-one", "--n1", "0,0", "--n2", "1.5708,0", "--trials", "1000", "--seed", "7",
                      "--no-superdeterminism"});
  REQUIRE(r.code == kExitOk);
  const auto j = json::parse(r.out);
  CHECK(j.at("certificates").size() >= 1);
  CHECK(j.at("seed") == 7);
  CHECK(j.at("trials").size() == 1000);
  CHECK(j.at("config").at("trials") == 1000);
}

TEST_CASE("fail-on-contradiction sets exit code 1") {
  const auto r = cli({"argument-one", "--n1", "0,0", "--n2", "1.5708,0", "--trials", "50", "--seed", "7",
                      "--no-superdeterminism", "--fail-on-contradiction"});
  CHECK(r.code == kExitContradiction);
  const auto quiet = cli({"argument-one", "--n1", "0,0", "--n2", "1.5708,0", "--trials", "50", "--seed", "7",
                          "--fail-on-contradiction"});
  CHECK(quiet.code == kExitOk);
}

TEST_CASE("bclm subcommand") {
  const auto r = cli({"bclm", "--inner", "0.7071", "--dim", "4"});
  REQUIRE(r.code == kExitOk);
  const auto j = json::parse(r.out);
  CHECK(j.at("results").at("omega_q").get<double>() == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-4));
  CHECK(j.at("results").at("bound").get<double>() ==
        doctest::Approx((1.0 - 1.0 / std::sqrt(2.0)) / 2.0).epsilon(1e-4));
}

TEST_CASE("usage errors exit 2 with usage text") {
  for (const auto &args : std::vector<std::vector<std::string>>{
           {},
           {"argument-one", "--n1", "0,0"},
           {"argument-one", "--n1", "0,0", "--n2", "7,0"},
           {"argument-one", "--n1", "0,0", "--n2", "1,0", "--trials", "0"},
           {"bclm", "--inner", "0.5"},
           {"bclm", "--inner", "0.5", "--dim", "1"},
           {"argument-two", "--branch", "sideways"},
           {"overlap-lp", "--states", "0,0"},
           {"no-such-command"},
           {"em-basic", "--bogus"}}) {
    const auto r = cli(args);
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("Usage") != std::string::npos);
  }
}

TEST_CASE("help exits 0") {
  const auto r = cli({"--help"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("argument-one") != std::string::npos);
}

TEST_CASE("numerical failure exits 3") {
  // A cap below |Λ| = 4 cannot be honored.
  const auto r = cli({"overlap-lp", "--lp-cap", "3", "--seed", "1"});
  CHECK(r.code == kExitNumerical);
}

TEST_CASE("overlap-lp defaults and the two-copy variant") {
  const auto plain = cli({"overlap-lp", "--seed", "1"});
  REQUIRE(plain.code == kExitOk);
  CHECK(json::parse(plain.out).at("results").at("omega_c_max").get<double>() == doctest::Approx(0.5).epsilon(1e-9));
  const auto pbr = cli({"overlap-lp", "--pbr", "--seed", "1"});
  REQUIRE(pbr.code == kExitOk);
  const auto j = json::parse(pbr.out);
  CHECK(j.at("results").at("omega_c_max").get<double>() <= 1e-9);
  CHECK(j.at("results").at("antidistinguishing_certificate").at("antidistinguishing") == true);
}

TEST_CASE("argument-two branches") {
  const auto up = json::parse(cli({"argument-two", "--branch", "up", "--seed", "2"}).out);
  CHECK(up.at("results").at("same_token") == true);
  REQUIRE(up.at("certificates").size() == 1);
  CHECK(up.at("certificates")[0].at("fidelity").get<double>() == doctest::Approx(0.5).epsilon(1e-10));
  const auto down = json::parse(cli({"argument-two", "--branch", "down", "--seed", "2"}).out);
  CHECK(down.at("certificates").empty());
}

TEST_CASE("omitted seed is generated and echoed for replay") {
  const auto first = cli({"argument-two"});
  REQUIRE(first.code == kExitOk);
  const auto seed = json::parse(first.out).at("seed").get<std::uint64_t>();
  const auto replay = cli({"argument-two", "--seed", std::to_string(seed)});
  CHECK(replay.out == first.out);
}

TEST_CASE("identical configuration gives identical bytes") {
  const std::vector<std::vector<std::string>> runs{
      {"em-basic", "--seed", "4"},
      {"argument-one", "--n1", "0,0", "--n2", "1.5708,0", "--trials", "300", "--seed", "4", "--no-superdeterminism"},
      {"argument-two", "--seed", "4"},
      {"overlap-lp", "--seed", "4"},
      {"bclm", "--inner", "0.3", "--dim", "3", "--seed", "4"}};
  for (const auto &args : runs) {
    CHECK(cli(args).out == cli(args).out);
  }
  auto threaded = runs[1];
  threaded.insert(threaded.end(), {"--threads", "3"});
  CHECK(cli(threaded).out == cli(runs[1]).out);
}

TEST_CASE("config file supplies values and flags win") {
  const auto path = temp_file("config.json");
  {
    std::ofstream f(path);
    f << R"({"n1": [0, 0], "n2": "1.5707963267948966,0", "trials": 40, "seed": 11, "no_superdeterminism": true})";
  }
  const auto from_file = cli({"argument-one", "--config", path.string()});
  REQUIRE(from_file.code == kExitOk);
  const auto j = json::parse(from_file.out);
  CHECK(j.at("seed") == 11);
  CHECK(j.at("trials").size() == 40);
  CHECK(j.at("config").at("no_superdeterminism") == true);

  const auto override = cli({"argument-one", "--config", path.string(), "--trials", "12", "--seed", "3"});
  REQUIRE(override.code == kExitOk);
  const auto k = json::parse(override.out);
  CHECK(k.at("seed") == 3);
  CHECK(k.at("trials").size() == 12);

  {
    std::ofstream f(path);
    f << R"({"trials": "many"})";
  }
  CHECK(cli({"argument-one", "--config", path.string(), "--n1", "0,0", "--n2", "1,0"}).code == kExitUsage);
  CHECK(cli({"argument-one", "--config", (path.string() + ".missing")}).code == kExitUsage);
  std::filesystem::remove(path);
}

TEST_CASE("file sinks for the report and the trial CSV") {
  const auto out = temp_file("report.json");
  const auto csv = temp_file("trials.csv");
  const auto r = cli({"argument-one", "--n1", "0,0", "--n2", "1.5708,0", "--trials", "5", "--seed", "1", "--out",
                      out.string(), "--csv", csv.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.empty());
  std::ifstream fr(out), fc(csv);
  std::stringstream rs, cs;
  rs << fr.rdbuf();
  cs << fc.rdbuf();
  CHECK(json::parse(rs.str()).at("trials").size() == 5);
  CHECK(cs.str().rfind("trial,fprime,f_basis,f_outcome,routed_to,assigned_state\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : cs.str()) {
    lines += c == '\n';
  }
  CHECK(lines == 6);
  std::filesystem::remove(out);
  std::filesystem::remove(csv);
}

TEST_CASE("timing appears only on request") {
  const auto plain = json::parse(cli({"bclm", "--inner", "0.5", "--dim", "2", "--seed", "1"}).out);
  CHECK_FALSE(plain.contains("timing_seconds"));
  const auto timed = json::parse(cli({"bclm", "--inner", "0.5", "--dim", "2", "--seed", "1", "--emit-timing"}).out);
  CHECK(timed.contains("timing_seconds"));
}

TEST_CASE("direction parsing") {
  CHECK(parse_direction("0,0").same_as(ontic_nogo::hilbert::Direction::z()));
  CHECK_THROWS_AS(parse_direction("1"), UsageError);
  CHECK_THROWS_AS(parse_direction("1,2,3"), UsageError);
  CHECK_THROWS_AS(parse_direction("4,0"), UsageError);
  CHECK(parse_directions("0,0;1.5707963267948966,0").size() == 2);
}

TEST_CASE("thread count from the environment") {
  ::setenv("ONTIC_NOGO_THREADS", "abc", 1);
  CHECK(cli({"em-basic", "--seed", "1"}).code == kExitUsage);
  ::setenv("ONTIC_NOGO_THREADS", "2", 1);
  CHECK(cli({"em-basic", "--seed", "1"}).code == kExitOk);
  ::unsetenv("ONTIC_NOGO_THREADS");
}

} // TEST_SUITE
