// One PASS/FAIL line per acceptance criterion; exit status is the number of
// failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "ontic_nogo/cli.hpp"
#include "ontic_nogo/overlap.hpp"
#include "ontic_nogo/scenario.hpp"
#include "support.hpp"

using namespace ontic_nogo;
using hilbert::Direction;
using hilbert::StateVector;
using test_support::Gen;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

int failures = 0;

void criterion(int id, const char *name, double budget_s, const std::function<Outcome()> &body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception &e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && dt >= budget_s) {
    o.require(false, "runtime " + std::to_string(dt) + " s over budget " + std::to_string(budget_s) + " s");
  }
  failures += o.pass ? 0 : 1;
  std::printf("%s %d %s (%.3f s)%s%s\n", o.pass ? "PASS" : "FAIL", id, name, dt, o.detail.empty() ? "" : ": ",
              o.detail.c_str());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string cli_out(std::vector<std::string> args) {
  args.insert(args.begin(), "ontic-nogo");
  std::vector<const char *> argv;
  for (const auto &a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return std::to_string(code) + "\n" + out.str();
}

Outcome two_branch_state() {
  Outcome o;
  const auto r = scenario::run_em_basic(1, 10);
  for (double p : r.branch_probabilities) {
    o.require(std::abs(p - 0.5) <= 1e-10, "branch probability " + fmt(p));
  }
  o.require(std::abs(r.verification_probability - 1.0) <= 1e-10,
            "verification probability " + fmt(r.verification_probability));
  for (auto k : r.verification_outcomes) {
    o.require(k == 0, "verification outcome " + std::to_string(k));
  }
  o.require(r.min_post_fidelity >= 1.0 - 1e-10, "post-state fidelity " + fmt(r.min_post_fidelity));
  return o;
}

Outcome free_choice_trials() {
  Outcome o;
  scenario::ArgumentOneConfig c;
  c.n1 = Direction::z();
  c.n2 = Direction::x();
  c.trials = 10000;
  c.seed = 20240601;
  c.no_superdeterminism = true;
  const auto on = scenario::run_argument_one(c);

  std::size_t up = 0;
  for (const auto &t : on.records) {
    up += t.fprime_outcome == scenario::Spin::up;
    if (t.f_basis == scenario::BasisId::z) {
      const auto &e = on.ledger.entry(scenario::OnticToken{t.trial_index});
      bool both = false;
      for (const auto &a : e.claims) {
        for (const auto &b : e.claims) {
          both = both || a.state != b.state;
        }
      }
      o.require(both, "z-z trial " + std::to_string(t.trial_index) + " lacks double membership");
    }
  }
  const double n = static_cast<double>(c.trials);
  const double frac = static_cast<double>(up) / n;
  o.require(std::abs(frac - 0.5) <= 3.0 * std::sqrt(0.25 / n), "F'-up fraction " + fmt(frac));

  const double oracle = std::norm(test_support::contract(test_support::psi_oracle(0.0, 0.0),
                                                         test_support::psi_oracle(test_support::kPi / 2.0, 0.0)));
  o.require(!on.certificates.empty(), "no certificate");
  for (const auto &cert : on.certificates) {
    if (std::abs(cert.fidelity - oracle) > 1e-9) {
      o.require(false, "certificate fidelity " + fmt(cert.fidelity) + " vs oracle " + fmt(oracle));
      break;
    }
  }
  c.no_superdeterminism = false;
  const auto off = scenario::run_argument_one(c);
  o.require(off.certificates.empty(), std::to_string(off.certificates.size()) + " certificates with flag off");
  if (o.pass) {
    o.detail = "fraction " + fmt(frac) + ", " + std::to_string(on.certificates.size()) + " certificates, fidelity " +
               fmt(on.certificates.front().fidelity);
  }
  return o;
}

Outcome null_signal() {
  Outcome o;
  scenario::ArgumentTwoConfig c;
  c.forced_outcome = scenario::Spin::up;
  const auto up = scenario::run_argument_two(c);
  o.require(up.token_at_0 == up.token_at_t0, "token changed on the null-signal branch");
  o.require(up.certificate.has_value(), "no certificate on the up branch");
  if (up.certificate) {
    o.require(std::abs(up.certificate->fidelity - 0.5) <= 1e-10, "fidelity " + fmt(up.certificate->fidelity));
  }
  c.forced_outcome = scenario::Spin::down;
  const auto down = scenario::run_argument_two(c);
  o.require(!down.certificate.has_value(), "certificate on the down branch");
  return o;
}

Outcome overlap_oracle() {
  Outcome o;
  const std::vector<StateVector> states{hilbert::spin_state(Direction::z(), true),
                                        hilbert::spin_state(Direction::x(), true)};
  const auto ms = ontic::MeasurementSet::spins({{"z", Direction::z()}, {"x", Direction::x()}});
  const auto space = ontic::enumerate_lambdas(ms);
  const auto res = optimize::max_classical_overlap(states, ms);
  o.require(std::abs(res.omega_c_max - 0.5) <= 1e-9, "LP optimum " + fmt(res.omega_c_max));

  // Exhaustive enumeration: vertices of each state's reproduction polytope,
  // then the best overlap over all vertex pairs and their midpoints.
  std::vector<std::vector<Eigen::VectorXd>> polys;
  for (const auto &s : states) {
    Eigen::MatrixXd a(4, 4);
    Eigen::VectorXd b(4);
    int row = 0;
    for (std::size_t m = 0; m < 2; ++m) {
      const auto p = hilbert::born(s, ms[m].povm);
      for (std::size_t k = 0; k < 2; ++k, ++row) {
        for (std::size_t l = 0; l < 4; ++l) {
          a(row, static_cast<Eigen::Index>(l)) = space.outcome(l, m) == k ? 1.0 : 0.0;
        }
        b(row) = p[k];
      }
    }
    polys.push_back(test_support::polytope_vertices(a, b));
  }
  double best = 0.0;
  for (const auto &u : polys[0]) {
    for (const auto &v : polys[1]) {
      best = std::max(best, u.cwiseMin(v).sum());
    }
  }
  o.require(polys[0].size() == 1 && polys[1].size() == 1, "reproduction polytopes are not single points");
  o.require(std::abs(res.omega_c_max - best) <= 1e-9, "LP " + fmt(res.omega_c_max) + " vs oracle " + fmt(best));

  const auto povm = optimize::pbr_antidistinguishing_povm();
  const auto check = optimize::verify_antidistinguishing(povm, states);
  o.require(check.antidistinguishing, "fixture is not antidistinguishing");
  const auto with = optimize::max_classical_overlap(states, ms.local_copies(2).with("pbr", povm));
  o.require(with.omega_c_max <= 1e-9, "optimum with antidistinguishing measurement " + fmt(with.omega_c_max));
  if (o.pass) {
    o.detail = "LP " + fmt(res.omega_c_max) + ", with two-copy antidistinguishing measurement " +
               fmt(with.omega_c_max);
  }
  return o;
}

hilbert::Povm random_measurement(Gen &g, std::size_t d) {
  const hilbert::CMatrix u = g.unitary(d);
  std::vector<hilbert::CMatrix> proj;
  for (std::size_t k = 0; k < d; ++k) {
    const hilbert::CVector v = u.col(static_cast<Eigen::Index>(k));
    proj.push_back(v * v.adjoint());
  }
  if (d == 3 && g.below(2) == 0) {
    proj[1] += proj[2];
    proj.pop_back();
  }
  return hilbert::Povm(proj);
}

Outcome lp_properties() {
  Outcome o;
  Gen g(555);
  double worst_perm = 0.0, worst_mono = 0.0, worst_rep = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = 2 + g.below(2);
    const std::size_t m = 1 + g.below(3);
    const auto layout = hilbert::SubsystemLayout::single("S", d);
    const std::vector<StateVector> states{StateVector(layout, g.unit_vector(d)),
                                          StateVector(layout, g.unit_vector(d))};
    std::vector<ontic::MeasurementSet::Entry> entries;
    for (std::size_t k = 0; k < m; ++k) {
      entries.push_back({"m" + std::to_string(k), random_measurement(g, d)});
    }
    const ontic::MeasurementSet ms(entries);
    const auto base = optimize::max_classical_overlap(states, ms);

    const auto space = ontic::enumerate_lambdas(ms);
    std::vector<std::size_t> order(space.size());
    std::iota(order.begin(), order.end(), 0);
    g.shuffle(order);
    worst_perm = std::max(worst_perm, std::abs(optimize::max_classical_overlap(states, ms, space.permuted(order))
                                                   .omega_c_max -
                                               base.omega_c_max));
    std::vector<std::size_t> morder(m);
    std::iota(morder.begin(), morder.end(), 0);
    g.shuffle(morder);
    worst_perm = std::max(
        worst_perm, std::abs(optimize::max_classical_overlap(states, ms.permuted(morder)).omega_c_max - base.omega_c_max));

    const auto more = optimize::max_classical_overlap(states, ms.with("extra", random_measurement(g, d)));
    worst_mono = std::max(worst_mono, more.omega_c_max - base.omega_c_max);

    std::map<std::string, StateVector> labeled;
    for (std::size_t i = 0; i < base.family.size(); ++i) {
      labeled.emplace(base.labels[i], base.family[i]);
    }
    worst_rep = std::max(worst_rep, ontic::check_reproduction(base.witness, labeled, ms).max_residual);
  }
  o.require(worst_perm <= 1e-9, "permutation drift " + fmt(worst_perm));
  o.require(worst_mono <= 1e-9, "optimum grew by " + fmt(worst_mono));
  o.require(worst_rep <= 1e-9, "reproduction residual " + fmt(worst_rep));
  if (o.pass) {
    o.detail = "max permutation drift " + fmt(worst_perm) + ", max reproduction residual " + fmt(worst_rep);
  }
  return o;
}

Outcome bclm_arithmetic() {
  Outcome o;
  const auto a = hilbert::spin_state(Direction::z(), true);
  const auto same = optimize::bclm_bound(a, a, 2);
  o.require(std::abs(same.omega_q - 1.0) <= 1e-12, "omega_Q(a,a) " + fmt(same.omega_q));
  const auto orth = optimize::bclm_bound(a, hilbert::spin_state(Direction::z(), false), 2);
  o.require(std::abs(orth.omega_q) <= 1e-12, "omega_Q(orthogonal) " + fmt(orth.omega_q));
  const double r2 = 1.0 / std::sqrt(2.0);
  const auto half = optimize::bclm_bound_from_inner(r2, 4);
  o.require(std::abs(half.omega_q - (1.0 - r2)) <= 1e-12, "omega_Q(1/sqrt2) " + fmt(half.omega_q));
  return o;
}

Outcome determinism() {
  Outcome o;
  const std::vector<std::vector<std::string>> runs{
      {"em-basic", "--seed", "99"},
      {"argument-one", "--n1", "0,0", "--n2", "1.5707963267948966,0", "--trials", "2000", "--seed", "99",
       "--no-superdeterminism"},
      {"argument-two", "--seed", "99"},
      {"overlap-lp", "--seed", "99"},
      {"overlap-lp", "--pbr", "--seed", "99"},
      {"bclm", "--inner", "0.6", "--dim", "3", "--seed", "99"}};
  for (const auto &args : runs) {
    o.require(cli_out(args) == cli_out(args), args.front() + " output differs between runs");
  }
  return o;
}

} // namespace

int main() {
  criterion(1, "encapsulated measurement two-branch state and verification", 1.0, two_branch_state);
  criterion(2, "free-choice protocol end to end", 10.0, free_choice_trials);
  criterion(3, "null-signal token persistence", 1.0, null_signal);
  criterion(4, "overlap LP oracle equivalence", 1.0, overlap_oracle);
  criterion(5, "LP properties on 100 random instances", 30.0, lp_properties);
  criterion(6, "BCLM arithmetic", 0.0, bclm_arithmetic);
  criterion(7, "byte-identical reruns", 0.0, determinism);
  return failures;
}
