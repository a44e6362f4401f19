#include "ontic_nogo/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "ontic_nogo/overlap.hpp"
#include "ontic_nogo/scenario.hpp"

namespace ontic_nogo::cli {

using nlohmann::json;
namespace sc = ontic_nogo::scenario;
namespace opt = ontic_nogo::optimize;

const char *to_string(ScenarioKind kind) {
  switch (kind) {
  case ScenarioKind::em_basic:
    return "em-basic";
  case ScenarioKind::argument_one:
    return "argument-one";
  case ScenarioKind::argument_two:
    return "argument-two";
  case ScenarioKind::overlap_lp:
    return "overlap-lp";
  case ScenarioKind::bclm:
    return "bclm";
  }
  return "?";
}

hilbert::Direction parse_direction(const std::string &text) {
  std::istringstream is(text);
  double polar = 0.0;
  double azimuth = 0.0;
  char comma = 0;
  if (!(is >> polar >> comma >> azimuth) || comma != ',' || !(is >> std::ws).eof()) {
    throw UsageError("direction must be 'polar,azimuth' in radians, got '" + text + "'");
  }
  try {
    return hilbert::Direction(polar, azimuth);
  } catch (const std::invalid_argument &e) {
    throw UsageError(std::string("invalid direction '") + text + "': " + e.what());
  }
}

std::vector<hilbert::Direction> parse_directions(const std::string &text) {
  std::vector<hilbert::Direction> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ';')) {
    if (!item.empty()) {
      out.push_back(parse_direction(item));
    }
  }
  if (out.empty()) {
    throw UsageError("expected at least one direction");
  }
  return out;
}

void RunConfig::validate() const {
  switch (kind) {
  case ScenarioKind::argument_one:
    if (!n1 || !n2) {
      throw UsageError("argument-one requires --n1 and --n2");
    }
    if (trials < 1) {
      throw UsageError("--trials must be at least 1");
    }
    break;
  case ScenarioKind::argument_two:
    if (!(t0 > 0.0)) {
      throw UsageError("--t0 must be positive");
    }
    if (branch != "random" && branch != "up" && branch != "down") {
      throw UsageError("--branch must be random, up or down");
    }
    break;
  case ScenarioKind::overlap_lp:
    if (states.size() < 2) {
      throw UsageError("overlap-lp needs at least two states");
    }
    if (pbr && states.size() != 2) {
      throw UsageError("--pbr applies to a pair of states");
    }
    if (lp_cap < 1) {
      throw UsageError("--lp-cap must be at least 1");
    }
    break;
  case ScenarioKind::bclm:
    if (!inner || !dim) {
      throw UsageError("bclm requires --inner and --dim");
    }
    if (*dim < 2) {
      throw UsageError("--dim must be at least 2");
    }
    if (!(*inner >= 0.0 && *inner <= 1.0)) {
      throw UsageError("--inner must lie in [0, 1]");
    }
    break;
  case ScenarioKind::em_basic:
    break;
  }
  if (!(lp_tolerance > 0.0) || !(support_epsilon > 0.0)) {
    throw UsageError("tolerances must be positive");
  }
}

namespace {

json direction_json(const hilbert::Direction &d) { return json::array({d.polar(), d.azimuth()}); }

json directions_json(const std::vector<hilbert::Direction> &ds) {
  json out = json::array();
  for (const auto &d : ds) {
    out.push_back(direction_json(d));
  }
  return out;
}

json amplitudes_json(const hilbert::StateVector &s) {
  json out = json::array();
  const auto &layout = s.layout();
  for (std::size_t i = 0; i < s.dim(); ++i) {
    const auto a = s.amplitude(i);
    if (std::abs(a) <= hilbert::kStructuralTol) {
      continue;
    }
    const auto digits = layout.digits(i);
    std::string basis;
    for (std::size_t k = 0; k < digits.size(); ++k) {
      basis += (k ? "," : "") + layout.subsystems()[k].label + "=" + std::to_string(digits[k]);
    }
    out.push_back({{"basis", basis}, {"re", a.real()}, {"im", a.imag()}});
  }
  return out;
}

void run_em_basic(const RunConfig &c, std::uint64_t seed, report::RunReport &r) {
  const auto em = sc::run_em_basic(seed, c.repeats);
  r.results = {{"phi", amplitudes_json(em.phi)},
               {"branch_probabilities", em.branch_probabilities},
               {"verification_probability", em.verification_probability},
               {"verification_outcomes", em.verification_outcomes},
               {"min_post_fidelity", em.min_post_fidelity}};
}

void run_argument_one(const RunConfig &c, std::uint64_t seed, report::RunReport &r) {
  sc::ArgumentOneConfig cfg{*c.n1, *c.n2, c.trials, seed, c.no_superdeterminism, c.threads};
  auto res = sc::run_argument_one(cfg);

  std::size_t up = 0, n1 = 0, n2 = 0;
  for (const auto &t : res.records) {
    up += t.fprime_outcome == sc::Spin::up;
    n1 += t.f_basis == sc::BasisId::n1;
    n2 += t.f_basis == sc::BasisId::n2;
  }
  const auto &psi1 = res.registry.at(sc::kPsiN1);
  const auto &psi2 = res.registry.at(sc::kPsiN2);
  r.results = {
      {"trial_count", res.records.size()},
      {"fprime_up_count", up},
      {"fprime_up_fraction", static_cast<double>(up) / static_cast<double>(res.records.size())},
      {"zz_trial_count", up},
      {"n1_trial_count", n1},
      {"n2_trial_count", n2},
      {"multi_membership_count", res.ledger.multi_membership_count()},
      {"certificate_count", res.certificates.size()},
      {"fidelity_psi_n1_psi_n2", res.fidelities.at(sc::kPsiN1, sc::kPsiN2)},
      {"verification",
       {{"Psi_n1_on_Psi_n1", sc::verify_superobserver(res.registry, psi1, sc::kPsiN1)},
        {"Psi_n2_on_Psi_n2", sc::verify_superobserver(res.registry, psi2, sc::kPsiN2)},
        {"Psi_n2_on_Psi_n1", sc::verify_superobserver(res.registry, psi1, sc::kPsiN2)}}},
  };
  r.trials = std::move(res.records);
  r.ledger = std::move(res.ledger);
  r.fidelities = std::move(res.fidelities);
  r.certificates = std::move(res.certificates);
  r.overlap = res.overlap;
  r.warnings = std::move(res.warnings);
}

void run_argument_two(const RunConfig &c, std::uint64_t seed, report::RunReport &r) {
  sc::ArgumentTwoConfig cfg{c.t0, seed, std::nullopt};
  if (c.branch == "up") {
    cfg.forced_outcome = sc::Spin::up;
  } else if (c.branch == "down") {
    cfg.forced_outcome = sc::Spin::down;
  }
  auto res = sc::run_argument_two(cfg);
  r.results = {{"t0", c.t0},
               {"f_outcome", sc::to_string(res.f_outcome)},
               {"outcome_probability", res.outcome_probability},
               {"token_at_0", res.token_at_0.str()},
               {"token_at_t0", res.token_at_t0.str()},
               {"same_token", res.token_at_0 == res.token_at_t0},
               {"null_signal", res.null_signal},
               {"assigned_before_t0", res.assigned_before_t0},
               {"assigned_at_t0", res.assigned_at_t0},
               {"lab_state_0", amplitudes_json(res.lab_state_0)},
               {"lab_state_t0", amplitudes_json(res.lab_state_t0)}};
  r.ledger = std::move(res.ledger);
  r.fidelities = std::move(res.fidelities);
  if (res.certificate) {
    r.certificates.push_back(*res.certificate);
  }
  r.overlap = res.overlap;
}

void run_overlap_lp(const RunConfig &c, report::RunReport &r) {
  std::vector<hilbert::StateVector> states;
  for (const auto &d : c.states) {
    states.push_back(hilbert::spin_state(d, true));
  }
  std::vector<std::pair<std::string, hilbert::Direction>> dirs;
  for (std::size_t i = 0; i < c.measurements.size(); ++i) {
    dirs.emplace_back("m" + std::to_string(i), c.measurements[i]);
  }
  auto ms = ontic::MeasurementSet::spins(dirs);
  json certificate = nullptr;
  if (c.pbr) {
    const auto povm = opt::pbr_antidistinguishing_povm();
    const auto check = opt::verify_antidistinguishing(povm, states, c.lp_tolerance);
    certificate = {{"antidistinguishing", check.antidistinguishing},
                   {"max_deviation", check.max_deviation},
                   {"deviations", check.deviations},
                   {"copies", check.copies}};
    if (!check.antidistinguishing) {
      throw UsageError("the PBR measurement does not antidistinguish these states");
    }
    ms = ms.local_copies(2).with("pbr", povm);
  }
  const opt::SolverOptions options{c.lp_tolerance};
  const auto res = opt::max_classical_overlap(states, ms, c.lp_cap, options);

  std::map<std::string, hilbert::StateVector> labeled;
  json witness = json::array();
  for (std::size_t i = 0; i < res.family.size(); ++i) {
    labeled.emplace(res.labels[i], res.family[i]);
    const auto &e = res.witness.epistemic(res.labels[i]);
    witness.push_back({{"label", e.label()}, {"weights", e.weights()}, {"support", e.support(c.support_epsilon)}});
  }
  const auto reproduction = ontic::check_reproduction(res.witness, labeled, ms);
  r.results = {{"omega_c_max", res.omega_c_max},
               {"copies", res.copies},
               {"family_size", res.family.size()},
               {"lambda_count", res.witness.space().size()},
               {"measurement_ids", [&] {
                  json ids = json::array();
                  for (const auto &e : ms.entries()) {
                    ids.push_back(e.id);
                  }
                  return ids;
                }()},
               {"lp",
                {{"status", opt::to_string(res.solution.status)},
                 {"iterations", res.solution.iterations},
                 {"primal_residual", res.solution.primal_residual},
                 {"dual_residual", res.solution.dual_residual},
                 {"duality_gap", res.solution.duality_gap}}},
               {"reproduction_residual", reproduction.max_residual},
               {"witness", witness},
               {"antidistinguishing_certificate", certificate}};
  const auto bclm = opt::bclm_bound(states[0], states[1], states[0].dim());
  r.overlap = opt::make_overlap_report(bclm, false, res.omega_c_max);
}

void run_bclm(const RunConfig &c, report::RunReport &r) {
  const auto f = opt::bclm_bound_from_inner(*c.inner, *c.dim);
  r.results = {{"abs_inner", f.abs_inner}, {"omega_q", f.omega_q}, {"bound", f.bound}, {"dimension", f.dimension}};
  r.overlap = opt::make_overlap_report(f, false);
}

} // namespace

json config_echo(const RunConfig &c) {
  json j{{"scenario", to_string(c.kind)}};
  switch (c.kind) {
  case ScenarioKind::em_basic:
    j["repeats"] = c.repeats;
    break;
  case ScenarioKind::argument_one:
    j["n1"] = c.n1 ? direction_json(*c.n1) : json(nullptr);
    j["n2"] = c.n2 ? direction_json(*c.n2) : json(nullptr);
    j["trials"] = c.trials;
    j["no_superdeterminism"] = c.no_superdeterminism;
    break;
  case ScenarioKind::argument_two:
    j["t0"] = c.t0;
    j["branch"] = c.branch;
    break;
  case ScenarioKind::overlap_lp:
    j["states"] = directions_json(c.states);
    j["measurements"] = directions_json(c.measurements);
    j["pbr"] = c.pbr;
    j["lp_cap"] = c.lp_cap;
    j["lp_tolerance"] = c.lp_tolerance;
    j["support_epsilon"] = c.support_epsilon;
    break;
  case ScenarioKind::bclm:
    j["inner"] = c.inner ? json(*c.inner) : json(nullptr);
    j["dim"] = c.dim ? json(*c.dim) : json(nullptr);
    break;
  }
  return j;
}

report::RunReport run_pipeline(const RunConfig &config, std::uint64_t seed) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  report::RunReport r;
  r.scenario = to_string(config.kind);
  r.config = config_echo(config);
  r.seed = seed;
  switch (config.kind) {
  case ScenarioKind::em_basic:
    run_em_basic(config, seed, r);
    break;
  case ScenarioKind::argument_one:
    run_argument_one(config, seed, r);
    break;
  case ScenarioKind::argument_two:
    run_argument_two(config, seed, r);
    break;
  case ScenarioKind::overlap_lp:
    run_overlap_lp(config, r);
    break;
  case ScenarioKind::bclm:
    run_bclm(config, r);
    break;
  }
  if (config.emit_timing) {
    r.timing_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return r;
}

bool has_contradiction(const report::RunReport &r) {
  return !r.certificates.empty() || (r.overlap && r.overlap->contradiction);
}

} // namespace ontic_nogo::cli
