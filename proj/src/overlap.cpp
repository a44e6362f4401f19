#include "ontic_nogo/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ontic_nogo::optimize {

using hilbert::CMatrix;
using hilbert::CVector;
using hilbert::StateVector;

std::vector<StateVector> tensor_power_family(std::span<const StateVector> states, std::size_t copies) {
  if (states.empty() || copies < 1) {
    throw std::invalid_argument("tensor power needs states and at least one copy");
  }
  std::vector<StateVector> family(states.begin(), states.end());
  for (std::size_t c = 1; c < copies; ++c) {
    std::vector<StateVector> next;
    next.reserve(family.size() * states.size());
    for (const auto &prefix : family) {
      for (const auto &s : states) {
        // Fresh labels per copy keep the layout valid.
        const auto copy_layout = hilbert::SubsystemLayout::single("copy" + std::to_string(c), s.dim());
        next.push_back(hilbert::tensor(prefix, s.relabeled(copy_layout)));
      }
    }
    family = std::move(next);
  }
  return family;
}

std::size_t copies_for(std::size_t state_dim, std::size_t measurement_dim) {
  std::size_t copies = 1;
  std::size_t d = state_dim;
  while (d < measurement_dim && state_dim > 1) {
    d *= state_dim;
    ++copies;
  }
  if (d != measurement_dim) {
    throw hilbert::DimensionError("measurement dimension " + std::to_string(measurement_dim) +
                                  " is not a tensor power of state dimension " + std::to_string(state_dim));
  }
  return copies;
}

OverlapLp build_overlap_lp(std::span<const StateVector> states, const ontic::MeasurementSet &ms,
                           const ontic::OnticSpace &space) {
  if (states.size() < 2) {
    throw std::invalid_argument("overlap LP needs at least two states");
  }
  if (space.outcome_counts() != ms.outcome_counts()) {
    throw std::invalid_argument("ontic space does not match the measurement set");
  }
  for (const auto &s : states) {
    if (s.dim() != ms.dim()) {
      throw hilbert::DimensionError("state dimension differs from measurement dimension");
    }
  }
  OverlapLp lp;
  lp.state_count = states.size();
  lp.lambda_count = space.size();
  const auto L = lp.lambda_count;
  const auto N = lp.state_count;
  const auto vars = static_cast<Eigen::Index>((N + 1) * L);

  std::size_t eq_rows = 0;
  for (auto c : ms.outcome_counts()) {
    eq_rows += N * c;
  }
  auto &p = lp.problem;
  p.objective = Eigen::VectorXd::Zero(vars);
  p.objective.tail(static_cast<Eigen::Index>(L)).setOnes();
  p.eq_matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(eq_rows), vars);
  p.eq_rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(eq_rows));

  Eigen::Index row = 0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t m = 0; m < ms.size(); ++m) {
      const auto probs = hilbert::born(states[i], ms[m].povm);
      for (std::size_t k = 0; k < probs.size(); ++k, ++row) {
        for (std::size_t l = 0; l < L; ++l) {
          if (space.outcome(l, m) == k) {
            p.eq_matrix(row, static_cast<Eigen::Index>(lp.weight_var(i, l))) = 1.0;
          }
        }
        // Born values within roundoff of the unit interval.
        p.eq_rhs(row) = std::clamp(probs[k], 0.0, 1.0);
      }
    }
  }

  p.ub_matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N * L), vars);
  p.ub_rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N * L));
  row = 0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t l = 0; l < L; ++l, ++row) {
      p.ub_matrix(row, static_cast<Eigen::Index>(lp.overlap_var(l))) = 1.0;
      p.ub_matrix(row, static_cast<Eigen::Index>(lp.weight_var(i, l))) = -1.0;
    }
  }
  p.variable_names.reserve(static_cast<std::size_t>(vars));
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t l = 0; l < L; ++l) {
      p.variable_names.push_back("mu[" + std::to_string(i) + "][" + std::to_string(l) + "]");
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    p.variable_names.push_back("t[" + std::to_string(l) + "]");
  }
  return lp;
}

namespace {

std::vector<double> clean_weights(const Eigen::VectorXd &x, std::size_t offset, std::size_t count) {
  std::vector<double> w(count);
  double sum = 0.0;
  for (std::size_t l = 0; l < count; ++l) {
    w[l] = std::max(0.0, x(static_cast<Eigen::Index>(offset + l)));
    sum += w[l];
  }
  // Absorb solver roundoff so the weights meet the 1e-12 normalization check.
  for (auto &v : w) {
    v /= sum;
  }
  return w;
}

} // namespace

OverlapResult max_classical_overlap(std::span<const StateVector> states, const ontic::MeasurementSet &ms,
                                    std::size_t cap, const SolverOptions &options) {
  return max_classical_overlap(states, ms, ontic::enumerate_lambdas(ms, cap), options);
}

OverlapResult max_classical_overlap(std::span<const StateVector> states, const ontic::MeasurementSet &ms,
                                    const ontic::OnticSpace &space, const SolverOptions &options) {
  if (states.size() < 2) {
    throw std::invalid_argument("overlap needs at least two states");
  }
  const auto copies = copies_for(states.front().dim(), ms.dim());
  auto family = copies == 1 ? std::vector<StateVector>(states.begin(), states.end())
                            : tensor_power_family(states, copies);
  const auto lp = build_overlap_lp(family, ms, space);
  auto solution = solve_lp(lp.problem, options);
  if (solution.status != LpStatus::optimal) {
    throw LpFailure(std::string("overlap LP did not reach certified optimality: ") + to_string(solution.status),
                    solution.status);
  }

  std::vector<std::string> labels;
  std::vector<ontic::EpistemicState> epistemics;
  for (std::size_t i = 0; i < family.size(); ++i) {
    labels.push_back("state" + std::to_string(i));
    epistemics.emplace_back(labels.back(), clean_weights(solution.x, lp.weight_var(i, 0), lp.lambda_count));
  }
  const double optimum = std::clamp(solution.optimum, 0.0, 1.0);
  return OverlapResult{optimum, ontic::OnticModel(space, std::move(epistemics)), std::move(family),
                       std::move(labels), copies, std::move(solution)};
}

AntidistinguishingCheck verify_antidistinguishing(const hilbert::Povm &povm, std::span<const StateVector> states,
                                                  double tol) {
  if (states.empty()) {
    throw std::invalid_argument("no states to antidistinguish");
  }
  AntidistinguishingCheck check;
  check.copies = copies_for(states.front().dim(), povm.dim());
  const auto family =
      check.copies == 1 ? std::vector<StateVector>(states.begin(), states.end()) : tensor_power_family(states, check.copies);
  if (family.size() != povm.outcome_count()) {
    throw std::invalid_argument("antidistinguishing POVM needs one effect per state (" +
                                std::to_string(family.size()) + " states, " +
                                std::to_string(povm.outcome_count()) + " effects)");
  }
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto &a = family[i].amplitudes();
    const double p = a.dot(povm.effects()[i] * a).real();
    check.deviations.push_back(p);
    check.max_deviation = std::max(check.max_deviation, p);
  }
  check.antidistinguishing = check.max_deviation <= tol;
  return check;
}

hilbert::Povm pbr_antidistinguishing_povm() {
  const double r = 1.0 / std::numbers::sqrt2;
  CVector zero(2), one(2), plus(2), minus(2);
  zero << 1.0, 0.0;
  one << 0.0, 1.0;
  plus << r, r;
  minus << r, -r;
  const auto prod = [](const CVector &a, const CVector &b) {
    CVector out(4);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        out(2 * i + j) = a(i) * b(j);
      }
    }
    return out;
  };
  const std::vector<CVector> basis{
      r * (prod(zero, one) + prod(one, zero)),
      r * (prod(zero, minus) + prod(one, plus)),
      r * (prod(plus, one) + prod(minus, zero)),
      r * (prod(plus, minus) + prod(minus, plus)),
  };
  std::vector<CMatrix> effects;
  for (const auto &v : basis) {
    effects.push_back(v * v.adjoint());
  }
  return hilbert::Povm(std::move(effects));
}

double quantum_overlap(double abs_inner) {
  const double f = std::clamp(abs_inner * abs_inner, 0.0, 1.0);
  return 1.0 - std::sqrt(1.0 - f);
}

BclmFragment bclm_bound_from_inner(double abs_inner, std::size_t d) {
  if (d < 2) {
    throw std::invalid_argument("dimension must be at least 2");
  }
  if (!(abs_inner >= 0.0 && abs_inner <= 1.0 + hilbert::kStructuralTol)) {
    throw std::invalid_argument("|<a|b>| must lie in [0, 1]");
  }
  BclmFragment f;
  f.abs_inner = std::min(abs_inner, 1.0);
  f.omega_q = quantum_overlap(f.abs_inner);
  f.dimension = d;
  f.bound = 2.0 / static_cast<double>(d) * f.omega_q;
  return f;
}

BclmFragment bclm_bound(const StateVector &a, const StateVector &b, std::size_t d) {
  return bclm_bound_from_inner(std::abs(hilbert::inner(a, b)), d);
}

OverlapReport make_overlap_report(const BclmFragment &bclm, bool forced_overlap_claim,
                                  std::optional<double> lp_omega_c) {
  OverlapReport r;
  r.fidelity = bclm.abs_inner * bclm.abs_inner;
  r.omega_q = bclm.omega_q;
  r.bclm_bound = bclm.bound;
  r.dimension = bclm.dimension;
  r.pbr_disjoint_required = r.fidelity < 1.0 - hilbert::kStructuralTol;
  r.forced_overlap_claim = forced_overlap_claim;
  if (lp_omega_c) {
    r.omega_c_max = *lp_omega_c;
    r.omega_c_source = "lp";
  } else if (r.pbr_disjoint_required) {
    r.omega_c_max = 0.0;
    r.omega_c_source = "pbr-asserted";
  } else {
    r.omega_c_max = 1.0;
    r.omega_c_source = "identical-states";
  }
  r.contradiction = forced_overlap_claim && *r.omega_c_max <= kLpTol;
  return r;
}

} // namespace ontic_nogo::optimize
