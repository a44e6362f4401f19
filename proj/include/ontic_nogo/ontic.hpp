#pragma once

// Finite ontic models over outcome-deterministic ontic states.
//
// An ontic state λ is a joint outcome assignment, one outcome per measurement
// of a fixed MeasurementSet. Indeterministic response functions are convex
// mixtures of these, so nothing is lost for reproduction and overlap questions
// posed relative to that set.

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ontic_nogo/hilbert.hpp"

namespace ontic_nogo::ontic {

/// A weight counts as positive (λ in the support) above this.
inline constexpr double kSupportEpsilon = 1e-12;
/// Tolerance on Σ_λ weights = 1.
inline constexpr double kNormalizationTol = 1e-12;
/// Reproduction residual accepted as exact.
inline constexpr double kReproductionTol = 1e-9;
inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

class EnumerationCapExceeded : public std::length_error {
public:
  using std::length_error::length_error;
};

class MeasurementSet {
public:
  struct Entry {
    std::string id;
    hilbert::Povm povm;
  };

  /// Nonempty; ids unique; all POVMs on one dimension.
  explicit MeasurementSet(std::vector<Entry> entries);

  /// Spin measurements along each direction, outcome 0 = up.
  static MeasurementSet spins(const std::vector<std::pair<std::string, hilbert::Direction>> &directions);

  const std::vector<Entry> &entries() const { return entries_; }
  const Entry &operator[](std::size_t i) const { return entries_.at(i); }
  std::size_t size() const { return entries_.size(); }
  std::size_t dim() const { return dim_; }
  std::vector<std::size_t> outcome_counts() const;
  std::size_t index_of(const std::string &id) const;

  MeasurementSet with(std::string id, hilbert::Povm povm) const;
  /// Entries reordered so that entry i of the result is entry order[i] of this.
  MeasurementSet permuted(std::span<const std::size_t> order) const;

  /// Every measurement applied locally to each of `copies` tensor factors,
  /// ids suffixed "@<copy>", copy-major order.
  MeasurementSet local_copies(std::size_t copies) const;

private:
  std::vector<Entry> entries_;
  std::size_t dim_ = 0;
};

class OnticSpace {
public:
  using Assignment = std::vector<std::size_t>;

  /// Validates that assignments are distinct and fit `outcome_counts`.
  OnticSpace(std::vector<std::size_t> outcome_counts, std::vector<Assignment> lambdas);

  std::size_t size() const { return lambdas_.size(); }
  const std::vector<Assignment> &lambdas() const { return lambdas_; }
  const std::vector<std::size_t> &outcome_counts() const { return outcome_counts_; }
  std::size_t outcome(std::size_t lambda, std::size_t measurement) const { return lambdas_[lambda][measurement]; }

  /// λ reordered so that λ i of the result is λ order[i] of this.
  OnticSpace permuted(std::span<const std::size_t> order) const;
  /// Assignment columns reordered to follow MeasurementSet::permuted(order).
  OnticSpace with_measurements_permuted(std::span<const std::size_t> order) const;

  bool operator==(const OnticSpace &) const = default;

private:
  std::vector<std::size_t> outcome_counts_;
  std::vector<Assignment> lambdas_;
};

/// All deterministic assignments, lexicographic with measurement 0 most
/// significant. Throws EnumerationCapExceeded if Π outcome counts > cap.
OnticSpace enumerate_lambdas(const MeasurementSet &ms, std::size_t cap = kDefaultEnumerationCap);

class EpistemicState {
public:
  /// Weights must be ≥ 0 and sum to 1 within kNormalizationTol.
  EpistemicState(std::string label, std::vector<double> weights);

  const std::string &label() const { return label_; }
  const std::vector<double> &weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  std::vector<std::size_t> support(double epsilon = kSupportEpsilon) const;

private:
  std::string label_;
  std::vector<double> weights_;
};

/// ξ(k | λ, M): one row-stochastic [λ × outcome] table per measurement.
class ResponseTable {
public:
  explicit ResponseTable(std::vector<Eigen::MatrixXd> tables);

  /// ξ(k|λ,M) = [assignment(λ, M) == k].
  static ResponseTable deterministic(const OnticSpace &space);

  double operator()(std::size_t outcome, std::size_t lambda, std::size_t measurement) const {
    return tables_[measurement](static_cast<Eigen::Index>(lambda), static_cast<Eigen::Index>(outcome));
  }
  std::size_t measurement_count() const { return tables_.size(); }
  const Eigen::MatrixXd &table(std::size_t measurement) const { return tables_.at(measurement); }

private:
  std::vector<Eigen::MatrixXd> tables_;
};

class OnticModel {
public:
  /// Uses the deterministic response of `space`.
  OnticModel(OnticSpace space, std::vector<EpistemicState> epistemics);
  OnticModel(OnticSpace space, std::vector<EpistemicState> epistemics, ResponseTable response);

  const OnticSpace &space() const { return space_; }
  const std::vector<EpistemicState> &epistemics() const { return epistemics_; }
  const ResponseTable &response() const { return response_; }

  /// Throws std::out_of_range for an unknown label.
  const EpistemicState &epistemic(const std::string &label) const;

private:
  OnticSpace space_;
  std::vector<EpistemicState> epistemics_;
  ResponseTable response_;
};

struct ReproductionReport {
  double max_residual = 0.0;
  std::string worst_state;
  std::size_t worst_measurement = 0;
  std::size_t worst_outcome = 0;
  bool pass = true;
};

/// max |Σ_λ P_ψ(λ) ξ(k|λ,M) − ⟨ψ|E_k|ψ⟩| over every labeled state, M and k.
/// Throws std::out_of_range when a state has no epistemic state in `model`.
ReproductionReport check_reproduction(const OnticModel &model, const std::map<std::string, hilbert::StateVector> &states,
                                      const MeasurementSet &ms);

/// Σ_λ min(a(λ), b(λ)).
double classical_overlap(const EpistemicState &a, const EpistemicState &b);
/// Σ_λ min_i P_i(λ) for two or more distributions.
double classical_overlap(std::span<const EpistemicState> states);

bool supports_disjoint(const EpistemicState &a, const EpistemicState &b, double epsilon = kSupportEpsilon);

/// True iff every λ in the support of `label` answers `outcome` of
/// `measurement` with certainty.
bool certain_on_support(const OnticModel &model, const std::string &label, std::size_t measurement,
                        std::size_t outcome = 0);

} // namespace ontic_nogo::ontic
