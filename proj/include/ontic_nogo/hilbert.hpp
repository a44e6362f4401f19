#pragma once

// Finite-dimensional state-vector core: labeled tensor-product layouts, pure
// states, unitaries, POVMs and projective measurements with state update.
//
// Basis ordering is row-major over the layout: the first subsystem is the most
// significant digit, so the amplitude vector of a ⊗ b is the Kronecker product
// of the two amplitude vectors.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ontic_nogo::hilbert {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Structural tolerance for norms, unitarity and POVM completeness.
inline constexpr double kStructuralTol = 1e-10;

/// Largest total dimension the dense representation accepts.
inline constexpr std::size_t kMaxTotalDim = 4096;

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class Subsystem {
public:
  std::string label;
  std::size_t dim = 1;

  bool operator==(const Subsystem &) const = default;
};

class SubsystemLayout {
public:
  SubsystemLayout() = default;
  explicit SubsystemLayout(std::vector<Subsystem> subsystems);

  /// Single-factor layout.
  static SubsystemLayout single(std::string label, std::size_t dim);

  const std::vector<Subsystem> &subsystems() const { return subsystems_; }
  std::size_t total_dim() const { return total_dim_; }
  std::size_t size() const { return subsystems_.size(); }

  /// Position of `label`; throws std::out_of_range if absent.
  std::size_t position(const std::string &label) const;
  bool contains(const std::string &label) const;

  /// Layout of a ⊗ b. Throws DimensionError on a label collision.
  SubsystemLayout concat(const SubsystemLayout &other) const;

  /// Per-subsystem digits of a flat basis index.
  std::vector<std::size_t> digits(std::size_t index) const;
  std::size_t index(std::span<const std::size_t> digits) const;

  bool operator==(const SubsystemLayout &) const = default;

private:
  std::vector<Subsystem> subsystems_;
  std::size_t total_dim_ = 1;
};

class StateVector {
public:
  /// Validates ‖amplitudes‖ = 1 within kStructuralTol.
  StateVector(SubsystemLayout layout, CVector amplitudes);

  /// Rescales `amplitudes` to unit norm; throws if the norm vanishes.
  static StateVector normalized(SubsystemLayout layout, CVector amplitudes);

  /// Computational basis state |index⟩.
  static StateVector basis(SubsystemLayout layout, std::size_t index);

  const SubsystemLayout &layout() const { return layout_; }
  const CVector &amplitudes() const { return amplitudes_; }
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
  Complex amplitude(std::size_t index) const { return amplitudes_(static_cast<Eigen::Index>(index)); }

  /// Same amplitudes under a different layout of equal total dimension.
  StateVector relabeled(SubsystemLayout layout) const;

private:
  SubsystemLayout layout_;
  CVector amplitudes_;
};

class UnitaryOp {
public:
  /// Validates U†U = I entrywise within kStructuralTol.
  UnitaryOp(SubsystemLayout layout, CMatrix matrix);

  static UnitaryOp identity(SubsystemLayout layout);

  const SubsystemLayout &layout() const { return layout_; }
  const CMatrix &matrix() const { return matrix_; }

  UnitaryOp adjoint() const;
  /// this ∘ first: applies `first`, then this.
  UnitaryOp after(const UnitaryOp &first) const;

private:
  SubsystemLayout layout_;
  CMatrix matrix_;
};

class Povm {
public:
  /// Validates Hermiticity, PSD (min eigenvalue ≥ -kStructuralTol) and Σ E = I.
  explicit Povm(std::vector<CMatrix> effects);

  const std::vector<CMatrix> &effects() const { return effects_; }
  std::size_t outcome_count() const { return effects_.size(); }
  std::size_t dim() const { return dim_; }

private:
  std::vector<CMatrix> effects_;
  std::size_t dim_ = 0;
};

class ProjectiveMeasurement {
public:
  /// Validates the Povm conditions plus P² = P for every effect.
  explicit ProjectiveMeasurement(std::vector<CMatrix> projectors);

  /// Rank-one projectors onto an orthonormal basis, in the order given.
  static ProjectiveMeasurement from_basis(std::span<const StateVector> basis);

  /// {|φ⟩⟨φ|, I - |φ⟩⟨φ|}: the superobserver's verification of φ.
  static ProjectiveMeasurement verification(const StateVector &phi);

  /// Measures only the subsystem `label` of `layout`: each projector P becomes
  /// I ⊗ .. ⊗ P ⊗ .. ⊗ I.
  ProjectiveMeasurement on_subsystem(const SubsystemLayout &layout, const std::string &label) const;

  const Povm &povm() const { return povm_; }
  const std::vector<CMatrix> &projectors() const { return povm_.effects(); }
  std::size_t outcome_count() const { return povm_.outcome_count(); }
  std::size_t dim() const { return povm_.dim(); }

private:
  Povm povm_;
};

/// Spin direction on the Bloch sphere; azimuth 0 is the x–z plane.
class Direction {
public:
  /// polar ∈ [0, π], azimuth ∈ [0, 2π); throws std::invalid_argument otherwise.
  Direction(double polar, double azimuth);

  static Direction z() { return {0.0, 0.0}; }
  static Direction x();
  static Direction y();

  double polar() const { return polar_; }
  double azimuth() const { return azimuth_; }
  Eigen::Vector3d bloch() const;

  /// True if the Bloch vectors coincide within `tol`.
  bool same_as(const Direction &other, double tol = kStructuralTol) const;

private:
  double polar_;
  double azimuth_;
};

/// Qubit spin eigenstate along `d`: (cos(θ/2), e^{iφ} sin(θ/2)) for up, the
/// orthogonal complement (-e^{-iφ} sin(θ/2), cos(θ/2)) for down.
StateVector spin_state(const Direction &d, bool up, const std::string &label = "S");

/// {|+d⟩⟨+d|, |-d⟩⟨-d|}; outcome 0 is spin up.
ProjectiveMeasurement spin_measurement(const Direction &d);

StateVector tensor(const StateVector &a, const StateVector &b);
StateVector tensor(std::span<const StateVector> factors);
CMatrix kron(const CMatrix &a, const CMatrix &b);

StateVector apply(const UnitaryOp &u, const StateVector &s);

/// Born probabilities ⟨s|E_k|s⟩.
std::vector<double> born(const StateVector &s, const Povm &m);
std::vector<double> born(const StateVector &s, const ProjectiveMeasurement &m);

Complex inner(const StateVector &a, const StateVector &b);
/// |⟨a|b⟩|².
double fidelity(const StateVector &a, const StateVector &b);

/// Normalized P_k s; throws std::domain_error when ⟨s|P_k|s⟩ vanishes.
StateVector project(const StateVector &s, const ProjectiveMeasurement &m, std::size_t outcome);

struct MeasurementResult {
  std::size_t outcome;
  double probability;
  StateVector post_state;
};

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Samples an outcome by the Born rule and returns the normalized post-state.
MeasurementResult measure(const StateVector &s, const ProjectiveMeasurement &m, std::mt19937_64 &rng);

/// Lifts `local`, acting on the subsystems `targets` (in that order), to the
/// full `layout`.
UnitaryOp embed(const UnitaryOp &local, const SubsystemLayout &layout, std::span<const std::string> targets);

/// Σ_c |c⟩⟨c|_control ⊗ U_c on `targets`, identity elsewhere. Control values
/// missing from `branches` get the identity.
UnitaryOp controlled(const SubsystemLayout &layout, const std::string &control,
                     std::span<const std::string> targets, const std::map<std::size_t, UnitaryOp> &branches);

} // namespace ontic_nogo::hilbert
