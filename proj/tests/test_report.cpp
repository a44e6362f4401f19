#include <doctest.h>

#include <sstream>

#include "ontic_nogo/report.hpp"
#include "ontic_nogo/scenario.hpp"
#include "support.hpp"

using namespace ontic_nogo;
using nlohmann::json;
using test_support::Gen;

namespace {

report::RunReport argument_one_report(std::uint64_t seed, bool flag) {
  scenario::ArgumentOneConfig c;
  c.trials = 50;
  c.seed = seed;
  c.no_superdeterminism = flag;
  auto res = scenario::run_argument_one(c);
  report::RunReport r;
  r.scenario = "argument-one";
  r.config = {{"trials", 50}, {"no_superdeterminism", flag}};
  r.seed = seed;
  r.trials = res.records;
  r.ledger = res.ledger;
  r.fidelities = res.fidelities;
  r.certificates = res.certificates;
  r.overlap = res.overlap;
  return r;
}

json random_json(Gen &g, int depth) {
  switch (depth <= 0 ? g.below(4) : g.below(6)) {
  case 0:
    return g.uniform(-1e6, 1e6) * std::pow(10.0, g.uniform(-20.0, 20.0));
  case 1:
    return static_cast<std::int64_t>(g.below(1000)) - 500;
  case 2:
    return std::string(1 + g.below(5), static_cast<char>('a' + g.below(26)));
  case 3:
    return g.below(2) == 0;
  case 4: {
    json a = json::array();
    for (std::size_t k = g.below(4); k > 0; --k) {
      a.push_back(random_json(g, depth - 1));
    }
    return a;
  }
  default: {
    json o = json::object();
    for (std::size_t k = g.below(4); k > 0; --k) {
      o[std::string(1, static_cast<char>('a' + g.below(26)))] = random_json(g, depth - 1);
    }
    return o;
  }
  }
}

} // namespace

TEST_SUITE("report") {

TEST_CASE("canonical form: sorted keys, 17 digits, trailing newline") {
  const json j = {{"b", 0.1}, {"a", {{"d", 1}, {"c", true}}}, {"e", nullptr}, {"f", -0.0}};
  CHECK(report::canonical_dump(j) == "{\"a\":{\"c\":true,\"d\":1},\"b\":0.10000000000000001,\"e\":null,\"f\":0}\n");
}

TEST_CASE("empty trial list is a valid document") {
  report::RunReport r;
  r.scenario = "bclm";
  const auto text = report::emit_json(r);
  const auto j = json::parse(text);
  CHECK(j.at("trials") == json::array());
  CHECK(j.at("schema_version") == report::kSchemaVersion);
  CHECK(j.at("ledger").is_null());
  CHECK_FALSE(j.contains("timing_seconds"));
  CHECK(text.back() == '\n');
}

TEST_CASE("equal inputs emit identical bytes") {
  CHECK(report::emit_json(argument_one_report(3, true)) == report::emit_json(argument_one_report(3, true)));
  CHECK(report::emit_json(argument_one_report(3, true)) != report::emit_json(argument_one_report(4, true)));
}

TEST_CASE("round trip: parse then re-emit is byte-identical") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto text = report::emit_json(argument_one_report(seed, seed % 2 == 0));
    CHECK(report::canonical_dump(json::parse(text)) == text);
  }
  Gen g(12);
  for (int k = 0; k < 500; ++k) {
    const auto text = report::canonical_dump(random_json(g, 4));
    CHECK(report::canonical_dump(json::parse(text)) == text);
  }
}

TEST_CASE("certificates can be recomputed from the ledger") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = argument_one_report(seed, true);
    const auto j = json::parse(report::emit_json(r));
    const auto recomputed = report::recompute_certificates(j);
    CHECK(recomputed == report::certificates_from_json(j.at("certificates")));
    CHECK(recomputed == r.certificates);
  }
}

TEST_CASE("ledger and fidelity table survive serialization") {
  const auto r = argument_one_report(9, true);
  const auto j = report::to_json(r);
  const auto ledger = report::ledger_from_json(j.at("ledger"));
  CHECK(ledger.entries() == r.ledger->entries());
  CHECK(ledger.no_superdeterminism());
  const auto t = report::fidelities_from_json(j.at("fidelities"));
  CHECK(t.pairs() == r.fidelities.pairs());
}

TEST_CASE("null-signal up branch document carries one half-fidelity certificate") {
  scenario::ArgumentTwoConfig c;
  c.forced_outcome = scenario::Spin::up;
  const auto res = scenario::run_argument_two(c);
  report::RunReport r;
  r.scenario = "argument-two";
  r.ledger = res.ledger;
  r.fidelities = res.fidelities;
  r.certificates.push_back(*res.certificate);
  const auto j = json::parse(report::emit_json(r));
  REQUIRE(j.at("certificates").size() == 1);
  CHECK(j.at("certificates")[0].at("fidelity").get<double>() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(report::recompute_certificates(j) == r.certificates);
}

TEST_CASE("trial CSV") {
  CHECK(report::emit_trials_csv({}) == "trial,fprime,f_basis,f_outcome,routed_to,assigned_state\n");
  std::vector<scenario::TrialRecord> rows(2);
  rows[0] = {0, scenario::Spin::up, scenario::BasisId::z, scenario::Spin::down, scenario::Superobserver::W1,
             scenario::kPsiN1};
  rows[1] = {1, scenario::Spin::down, scenario::BasisId::n2, scenario::Spin::up, scenario::Superobserver::W2,
             scenario::kPsiN2};
  const auto csv = report::emit_trials_csv(rows);
  CHECK(csv == "trial,fprime,f_basis,f_outcome,routed_to,assigned_state\n"
               "0,up,z,down,W1,Psi_n1\n"
               "1,down,n2,up,W2,Psi_n2\n");
}

TEST_CASE("run id depends on config and seed only") {
  const json c = {{"x", 1}};
  CHECK(report::run_id(c, 1) == report::run_id(c, 1));
  CHECK(report::run_id(c, 1) != report::run_id(c, 2));
  CHECK(report::run_id(c, 1).size() == 16);
}

} // TEST_SUITE
