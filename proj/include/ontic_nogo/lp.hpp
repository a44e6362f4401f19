#pragma once

// Dense two-phase simplex with Bland's rule.
//
//   maximize    cᵀx
//   subject to  A_eq x  = b_eq
//               A_ub x ≤ b_ub
//               x ≥ 0
//
// Pivoting is deterministic: the entering column is the lowest-index column
// with positive reduced cost, ties in the ratio test go to the lowest-index
// basic variable. Every optimal answer carries a dual solution so callers can
// audit optimality without trusting the pivot sequence.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ontic_nogo::optimize {

/// Feasibility and optimality tolerance for LP answers.
inline constexpr double kLpTol = 1e-9;

struct LpProblem {
  Eigen::VectorXd objective;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ub_matrix;
  Eigen::VectorXd ub_rhs;
  /// Optional, for diagnostics; empty or one per variable.
  std::vector<std::string> variable_names;

  std::size_t variable_count() const { return static_cast<std::size_t>(objective.size()); }

  /// Throws std::invalid_argument on inconsistent shapes or non-finite data.
  void validate() const;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, numerical_failure };

const char *to_string(LpStatus status);

struct SolverOptions {
  double tolerance = kLpTol;
  std::size_t max_iterations = 200'000;
};

struct LpSolution {
  LpStatus status = LpStatus::numerical_failure;
  double optimum = 0.0;
  Eigen::VectorXd x;
  /// Multipliers y (free) and z (≥ 0) of the dual
  ///   minimize b_eqᵀy + b_ubᵀz  s.t.  A_eqᵀy + A_ubᵀz ≥ c.
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd ub_duals;
  std::size_t iterations = 0;
  /// Largest violation of the primal constraints by x.
  double primal_residual = 0.0;
  /// Largest violation of dual feasibility.
  double dual_residual = 0.0;
  /// |dual objective − primal objective|.
  double duality_gap = 0.0;
};

LpSolution solve_lp(const LpProblem &problem, const SolverOptions &options = {});

/// Recomputes the primal residual, dual residual and duality gap of `solution`
/// from scratch against `problem`.
struct CertificateCheck {
  double primal_residual;
  double dual_residual;
  double duality_gap;
  bool ok(double tol = kLpTol) const { return primal_residual <= tol && dual_residual <= tol && duality_gap <= tol; }
};
CertificateCheck check_certificate(const LpProblem &problem, const LpSolution &solution);

} // namespace ontic_nogo::optimize
