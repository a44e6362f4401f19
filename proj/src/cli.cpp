#include "ontic_nogo/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ontic_nogo/overlap.hpp"
#include "ontic_nogo/pipeline.hpp"

namespace ontic_nogo::cli {

using nlohmann::json;

namespace {

// Raw option text as parsed; merged with a config file before conversion so
// that explicit flags win.
struct RawOptions {
  std::string config_path;
  std::string n1, n2, states, measurements;
  std::size_t trials = 0, repeats = 0, lp_cap = 0, threads = 0, dim = 0;
  std::uint64_t seed = 0;
  double t0 = 0, lp_tolerance = 0, support_epsilon = 0, inner = 0;
  std::string branch, out, csv;
};

std::size_t threads_from_env() {
  const char *v = std::getenv("ONTIC_NOGO_THREADS");
  if (v == nullptr || *v == '\0') {
    return 1;
  }
  char *end = nullptr;
  const unsigned long n = std::strtoul(v, &end, 10);
  if (*end != '\0' || n < 1) {
    throw UsageError(std::string("ONTIC_NOGO_THREADS must be a positive integer, got '") + v + "'");
  }
  return n;
}

hilbert::Direction direction_from_json(const json &j) {
  if (j.is_string()) {
    return parse_direction(j.get<std::string>());
  }
  if (j.is_array() && j.size() == 2) {
    return parse_direction(std::to_string(j[0].get<double>()) + "," + std::to_string(j[1].get<double>()));
  }
  throw UsageError("direction must be \"polar,azimuth\" or [polar, azimuth]");
}

std::vector<hilbert::Direction> directions_from_json(const json &j) {
  if (j.is_string()) {
    return parse_directions(j.get<std::string>());
  }
  if (!j.is_array()) {
    throw UsageError("direction list must be an array");
  }
  std::vector<hilbert::Direction> out;
  for (const auto &d : j) {
    out.push_back(direction_from_json(d));
  }
  return out;
}

/// Applies file values for keys whose flag was not given on the command line.
void apply_config_file(const json &file, const CLI::App &sub, RunConfig &c) {
  if (!file.is_object()) {
    throw UsageError("config file must hold a JSON object");
  }
  auto unset = [&](const char *flag) { return sub.get_option_no_throw(flag) == nullptr || sub.count(flag) == 0; };
  for (const auto &[key, v] : file.items()) {
    try {
      if (key == "scenario") {
        if (v.get<std::string>() != to_string(c.kind)) {
          throw UsageError("config file is for scenario '" + v.get<std::string>() + "'");
        }
      } else if (key == "n1" && unset("--n1")) {
        c.n1 = direction_from_json(v);
      } else if (key == "n2" && unset("--n2")) {
        c.n2 = direction_from_json(v);
      } else if (key == "trials" && unset("--trials")) {
        c.trials = v.get<std::size_t>();
      } else if (key == "no_superdeterminism" && unset("--no-superdeterminism")) {
        c.no_superdeterminism = v.get<bool>();
      } else if (key == "t0" && unset("--t0")) {
        c.t0 = v.get<double>();
      } else if (key == "branch" && unset("--branch")) {
        c.branch = v.get<std::string>();
      } else if (key == "repeats" && unset("--repeats")) {
        c.repeats = v.get<std::size_t>();
      } else if (key == "states" && unset("--states")) {
        c.states = directions_from_json(v);
      } else if (key == "measurements" && unset("--measurements")) {
        c.measurements = directions_from_json(v);
      } else if (key == "pbr" && unset("--pbr")) {
        c.pbr = v.get<bool>();
      } else if (key == "inner" && unset("--inner")) {
        c.inner = v.get<double>();
      } else if (key == "dim" && unset("--dim")) {
        c.dim = v.get<std::size_t>();
      } else if (key == "seed" && unset("--seed")) {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "lp_cap" && unset("--lp-cap")) {
        c.lp_cap = v.get<std::size_t>();
      } else if (key == "lp_tolerance" && unset("--lp-tolerance")) {
        c.lp_tolerance = v.get<double>();
      } else if (key == "support_epsilon" && unset("--support-epsilon")) {
        c.support_epsilon = v.get<double>();
      } else if (key == "threads" && unset("--threads")) {
        c.threads = v.get<std::size_t>();
      } else if (key == "out" && unset("--out")) {
        c.out_path = v.get<std::string>();
      } else if (key == "csv" && unset("--csv")) {
        c.csv_path = v.get<std::string>();
      } else if (key == "fail_on_contradiction" && unset("--fail-on-contradiction")) {
        c.fail_on_contradiction = v.get<bool>();
      } else if (key == "emit_timing" && unset("--emit-timing")) {
        c.emit_timing = v.get<bool>();
      } else if (key == "config") {
        throw UsageError("config files do not nest");
      }
    } catch (const json::exception &e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
}

void write_to(const std::string &path, const std::string &text, std::ostream &fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Extended-Wigner-friend and ontic-overlap no-go demonstrations", "ontic-nogo"};
  app.require_subcommand(1);
  RawOptions raw;
  RunConfig config;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", raw.config_path, "JSON file with option values; flags take precedence");
    sub->add_option("--seed", raw.seed, "Root seed (drawn from the OS if omitted)");
    sub->add_option("--out", raw.out, "Report path ('-' for stdout)");
    sub->add_option("--threads", raw.threads, "Worker threads (default $ONTIC_NOGO_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--fail-on-contradiction", config.fail_on_contradiction, "Exit 1 if a contradiction is certified");
    sub->add_flag("--emit-timing", config.emit_timing, "Include wall-clock timing in the report");
    sub->add_option("--lp-cap", raw.lp_cap, "Maximum number of deterministic ontic states");
    sub->add_option("--lp-tolerance", raw.lp_tolerance, "LP feasibility and optimality tolerance");
    sub->add_option("--support-epsilon", raw.support_epsilon, "Weight below which lambda is outside a support");
  };

  auto *em = app.add_subcommand("em-basic", "Unitary measurement of a friend on |+x>");
  add_common(em);
  em->add_option("--repeats", raw.repeats, "Repeated verification measurements");

  auto *one = app.add_subcommand("argument-one", "Two-lab Wigner-friend trials with directional choices");
  add_common(one);
  one->add_option("--n1", raw.n1, "Direction n1 as 'polar,azimuth' (radians)");
  one->add_option("--n2", raw.n2, "Direction n2 as 'polar,azimuth' (radians)");
  one->add_option("--trials", raw.trials, "Number of trials")->check(CLI::PositiveNumber);
  one->add_flag("--no-superdeterminism", config.no_superdeterminism, "Record counterfactual memberships");
  one->add_option("--csv", raw.csv, "Per-trial CSV path");

  auto *two = app.add_subcommand("argument-two", "Null-signal token persistence");
  add_common(two);
  two->add_option("--t0", raw.t0, "Time of the null signal");
  two->add_option("--branch", raw.branch, "Friend outcome: random, up or down");

  auto *lp = app.add_subcommand("overlap-lp", "Maximal classical overlap over deterministic models");
  add_common(lp);
  lp->add_option("--states", raw.states, "Spin-up states along 'p,a;p,a;...' (default z;x)");
  lp->add_option("--measurements", raw.measurements, "Spin measurements along 'p,a;p,a;...' (default z;x)");
  lp->add_flag("--pbr", config.pbr, "Two copies plus the antidistinguishing measurement");

  auto *bclm = app.add_subcommand("bclm", "Quantum overlap bound for a pair of states");
  add_common(bclm);
  bclm->add_option("--inner", raw.inner, "|<a|b>|");
  bclm->add_option("--dim", raw.dim, "Hilbert-space dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  CLI::App *sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "em-basic") {
    config.kind = ScenarioKind::em_basic;
  } else if (name == "argument-one") {
    config.kind = ScenarioKind::argument_one;
  } else if (name == "argument-two") {
    config.kind = ScenarioKind::argument_two;
  } else if (name == "overlap-lp") {
    config.kind = ScenarioKind::overlap_lp;
  } else {
    config.kind = ScenarioKind::bclm;
  }

  try {
    config.threads = threads_from_env();
    if (!raw.config_path.empty()) {
      std::ifstream f(raw.config_path);
      if (!f) {
        throw UsageError("cannot read config file '" + raw.config_path + "'");
      }
      json file;
      try {
        file = json::parse(f);
      } catch (const json::exception &e) {
        throw UsageError("config file: " + std::string(e.what()));
      }
      apply_config_file(file, *sub, config);
    }
    auto given = [&](const char *flag) { return sub->get_option_no_throw(flag) != nullptr && sub->count(flag) > 0; };
    if (given("--n1")) config.n1 = parse_direction(raw.n1);
    if (given("--n2")) config.n2 = parse_direction(raw.n2);
    if (given("--states")) config.states = parse_directions(raw.states);
    if (given("--measurements")) config.measurements = parse_directions(raw.measurements);
    if (given("--trials")) config.trials = raw.trials;
    if (given("--repeats")) config.repeats = raw.repeats;
    if (given("--t0")) config.t0 = raw.t0;
    if (given("--branch")) config.branch = raw.branch;
    if (given("--inner")) config.inner = raw.inner;
    if (given("--dim")) config.dim = raw.dim;
    if (given("--seed")) config.seed = raw.seed;
    if (given("--lp-cap")) config.lp_cap = raw.lp_cap;
    if (given("--lp-tolerance")) config.lp_tolerance = raw.lp_tolerance;
    if (given("--support-epsilon")) config.support_epsilon = raw.support_epsilon;
    if (given("--threads")) config.threads = raw.threads;
    if (given("--out")) config.out_path = raw.out;
    if (given("--csv")) config.csv_path = raw.csv;
    config.validate();
  } catch (const std::invalid_argument &e) {
    err << "error: " << e.what() << "\n" << sub->help();
    return kExitUsage;
  }

  const std::uint64_t seed = config.seed ? *config.seed : [] {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }();

  try {
    const auto report = run_pipeline(config, seed);
    write_to(config.out_path, report::emit_json(report), out);
    if (!config.csv_path.empty()) {
      write_to(config.csv_path, report::emit_trials_csv(report.trials), out);
    }
    for (const auto &w : report.warnings) {
      err << "warning: " << w << "\n";
    }
    if (config.fail_on_contradiction && has_contradiction(report)) {
      return kExitContradiction;
    }
    return kExitOk;
  } catch (const optimize::LpFailure &e) {
    err << "numerical failure: " << e.what() << " (" << optimize::to_string(e.status()) << ")\n";
    return kExitNumerical;
  } catch (const ontic::EnumerationCapExceeded &e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

} // namespace ontic_nogo::cli
