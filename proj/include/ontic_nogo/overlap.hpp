#pragma once

// Classical-overlap questions about ontic models: the largest Σ_λ min_i P_i(λ)
// any outcome-deterministic model can achieve while reproducing the Born
// statistics of a measurement set, operational certificates that force that
// overlap to zero, and the quantum/classical overlap bound comparison.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ontic_nogo/hilbert.hpp"
#include "ontic_nogo/lp.hpp"
#include "ontic_nogo/ontic.hpp"

namespace ontic_nogo::optimize {

class LpFailure : public std::runtime_error {
public:
  LpFailure(const std::string &what, LpStatus status) : std::runtime_error(what), status_(status) {}
  LpStatus status() const { return status_; }

private:
  LpStatus status_;
};

/// Product states ψ_{i1} ⊗ … ⊗ ψ_{in} over all index tuples, lexicographic.
std::vector<hilbert::StateVector> tensor_power_family(std::span<const hilbert::StateVector> states,
                                                      std::size_t copies);

/// Number of copies n with state_dim^n = measurement_dim; throws DimensionError
/// when no such n exists.
std::size_t copies_for(std::size_t state_dim, std::size_t measurement_dim);

/// Variables μ_i(λ) at i·|Λ| + λ, then t(λ) at N·|Λ| + λ.
struct OverlapLp {
  LpProblem problem;
  std::size_t state_count = 0;
  std::size_t lambda_count = 0;

  std::size_t weight_var(std::size_t state, std::size_t lambda) const { return state * lambda_count + lambda; }
  std::size_t overlap_var(std::size_t lambda) const { return state_count * lambda_count + lambda; }
};

/// maximize Σ t(λ) s.t. reproduction of every state on every measurement,
/// t(λ) ≤ μ_i(λ) for all i. `states` must already live on ms.dim().
OverlapLp build_overlap_lp(std::span<const hilbert::StateVector> states, const ontic::MeasurementSet &ms,
                           const ontic::OnticSpace &space);

struct OverlapResult {
  double omega_c_max = 0.0;
  ontic::OnticModel witness;
  /// The family the LP was posed for (the input states, or their tensor
  /// power when the measurements act on several copies).
  std::vector<hilbert::StateVector> family;
  std::vector<std::string> labels;
  std::size_t copies = 1;
  LpSolution solution;
};

/// Maximal common classical overlap of `states` compatible with the Born
/// statistics of `ms`. When ms acts on n copies of the states' space the
/// question is posed for the n-fold product family. Throws LpFailure if the
/// LP does not solve to certified optimality, ontic::EnumerationCapExceeded
/// if Λ would exceed `cap`.
OverlapResult max_classical_overlap(std::span<const hilbert::StateVector> states, const ontic::MeasurementSet &ms,
                                    std::size_t cap = ontic::kDefaultEnumerationCap, const SolverOptions &options = {});

/// Same, over a caller-supplied ontic space (e.g. a permuted enumeration).
OverlapResult max_classical_overlap(std::span<const hilbert::StateVector> states, const ontic::MeasurementSet &ms,
                                    const ontic::OnticSpace &space, const SolverOptions &options = {});

struct AntidistinguishingCheck {
  bool antidistinguishing = false;
  /// max_i ⟨ψ_i|E_i|ψ_i⟩.
  double max_deviation = 0.0;
  std::vector<double> deviations;
  std::size_t copies = 1;
};

/// Outcome i must never occur on state i. If the POVM acts on n copies, the
/// states are replaced by their n-fold product family first. One effect per
/// (lifted) state is required.
AntidistinguishingCheck verify_antidistinguishing(const hilbert::Povm &povm,
                                                  std::span<const hilbert::StateVector> states, double tol = kLpTol);

/// Two-copy entangled measurement that antidistinguishes the products of
/// {|0⟩, |+⟩}, ordered (00, 0+, +0, ++).
hilbert::Povm pbr_antidistinguishing_povm();

/// ω_Q(|⟨a|b⟩|) = 1 − √(1 − |⟨a|b⟩|²).
double quantum_overlap(double abs_inner);

struct BclmFragment {
  double abs_inner = 0.0;
  double omega_q = 0.0;
  /// (2/d)·ω_Q.
  double bound = 0.0;
  std::size_t dimension = 0;
};

/// Throws std::invalid_argument for d < 2.
BclmFragment bclm_bound(const hilbert::StateVector &a, const hilbert::StateVector &b, std::size_t d);
BclmFragment bclm_bound_from_inner(double abs_inner, std::size_t d);

struct OverlapReport {
  double fidelity = 0.0;
  double omega_q = 0.0;
  std::optional<double> omega_c_max;
  /// "lp", "pbr-asserted" or "identical-states".
  std::string omega_c_source;
  double bclm_bound = 0.0;
  std::size_t dimension = 0;
  bool pbr_disjoint_required = false;
  bool forced_overlap_claim = false;
  bool contradiction = false;
};

/// Combines the quantum side with either an LP optimum or, absent one, the
/// value PBR disjointness asserts for distinct states (0).
OverlapReport make_overlap_report(const BclmFragment &bclm, bool forced_overlap_claim,
                                  std::optional<double> lp_omega_c = std::nullopt);

} // namespace ontic_nogo::optimize
