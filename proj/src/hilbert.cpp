#include "ontic_nogo/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace ontic_nogo::hilbert {

namespace {

std::string dims_message(const char *what, std::size_t lhs, std::size_t rhs) {
  std::ostringstream os;
  os << what << ": dimension " << lhs << " vs " << rhs;
  return os.str();
}

void require_same_dim(const char *what, std::size_t lhs, std::size_t rhs) {
  if (lhs != rhs) {
    throw DimensionError(dims_message(what, lhs, rhs));
  }
}

bool is_identity(const CMatrix &m, double tol) {
  const auto n = m.rows();
  return m.cols() == n && (m - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() <= tol;
}

// Splits full basis indices into (local index over `targets`, key over the
// remaining subsystems).
struct IndexSplit {
  std::vector<std::size_t> local;
  std::vector<std::size_t> rest;
};

IndexSplit split_indices(const SubsystemLayout &layout, std::span<const std::size_t> target_positions) {
  IndexSplit split;
  const auto n = layout.total_dim();
  split.local.resize(n);
  split.rest.resize(n);
  const auto &subs = layout.subsystems();
  for (std::size_t i = 0; i < n; ++i) {
    const auto digits = layout.digits(i);
    std::size_t local = 0;
    for (auto pos : target_positions) {
      local = local * subs[pos].dim + digits[pos];
    }
    std::size_t rest = 0;
    for (std::size_t p = 0; p < subs.size(); ++p) {
      if (std::find(target_positions.begin(), target_positions.end(), p) == target_positions.end()) {
        rest = rest * subs[p].dim + digits[p];
      }
    }
    split.local[i] = local;
    split.rest[i] = rest;
  }
  return split;
}

std::vector<std::size_t> target_positions(const SubsystemLayout &layout, std::span<const std::string> targets) {
  std::vector<std::size_t> positions;
  positions.reserve(targets.size());
  for (const auto &t : targets) {
    const auto p = layout.position(t);
    if (std::find(positions.begin(), positions.end(), p) != positions.end()) {
      throw std::invalid_argument("repeated target subsystem '" + t + "'");
    }
    positions.push_back(p);
  }
  return positions;
}

std::size_t product_dim(const SubsystemLayout &layout, std::span<const std::size_t> positions) {
  std::size_t d = 1;
  for (auto p : positions) {
    d *= layout.subsystems()[p].dim;
  }
  return d;
}

} // namespace

// ---------------------------------------------------------------------------
// SubsystemLayout

SubsystemLayout::SubsystemLayout(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
  std::set<std::string> seen;
  total_dim_ = 1;
  for (const auto &s : subsystems_) {
    if (s.label.empty()) {
      throw std::invalid_argument("subsystem label must be nonempty");
    }
    if (!seen.insert(s.label).second) {
      throw DimensionError("duplicate subsystem label '" + s.label + "'");
    }
    if (s.dim < 1) {
      throw std::invalid_argument("subsystem '" + s.label + "' has dimension 0");
    }
    total_dim_ *= s.dim;
    if (total_dim_ > kMaxTotalDim) {
      throw DimensionError(dims_message("layout exceeds dense limit", total_dim_, kMaxTotalDim));
    }
  }
}

SubsystemLayout SubsystemLayout::single(std::string label, std::size_t dim) {
  return SubsystemLayout({Subsystem{std::move(label), dim}});
}

std::size_t SubsystemLayout::position(const std::string &label) const {
  for (std::size_t i = 0; i < subsystems_.size(); ++i) {
    if (subsystems_[i].label == label) {
      return i;
    }
  }
  throw std::out_of_range("no subsystem labeled '" + label + "'");
}

bool SubsystemLayout::contains(const std::string &label) const {
  return std::any_of(subsystems_.begin(), subsystems_.end(), [&](const Subsystem &s) { return s.label == label; });
}

SubsystemLayout SubsystemLayout::concat(const SubsystemLayout &other) const {
  std::vector<Subsystem> merged = subsystems_;
  merged.insert(merged.end(), other.subsystems_.begin(), other.subsystems_.end());
  return SubsystemLayout(std::move(merged));
}

std::vector<std::size_t> SubsystemLayout::digits(std::size_t index) const {
  std::vector<std::size_t> out(subsystems_.size());
  for (std::size_t k = subsystems_.size(); k-- > 0;) {
    out[k] = index % subsystems_[k].dim;
    index /= subsystems_[k].dim;
  }
  return out;
}

std::size_t SubsystemLayout::index(std::span<const std::size_t> digits) const {
  require_same_dim("layout digits", digits.size(), subsystems_.size());
  std::size_t idx = 0;
  for (std::size_t k = 0; k < subsystems_.size(); ++k) {
    if (digits[k] >= subsystems_[k].dim) {
      throw std::out_of_range("digit out of range for subsystem '" + subsystems_[k].label + "'");
    }
    idx = idx * subsystems_[k].dim + digits[k];
  }
  return idx;
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(SubsystemLayout layout, CVector amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
  require_same_dim("state amplitudes", static_cast<std::size_t>(amplitudes_.size()), layout_.total_dim());
  const double norm = amplitudes_.norm();
  if (!(std::abs(norm - 1.0) <= kStructuralTol)) {
    std::ostringstream os;
    os << "state vector not normalized (norm " << norm << ")";
    throw std::invalid_argument(os.str());
  }
}

StateVector StateVector::normalized(SubsystemLayout layout, CVector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::domain_error("cannot normalize a zero vector");
  }
  amplitudes /= norm;
  return StateVector(std::move(layout), std::move(amplitudes));
}

StateVector StateVector::basis(SubsystemLayout layout, std::size_t index) {
  if (index >= layout.total_dim()) {
    throw std::out_of_range("basis index out of range");
  }
  CVector v = CVector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return StateVector(std::move(layout), std::move(v));
}

StateVector StateVector::relabeled(SubsystemLayout layout) const {
  return StateVector(std::move(layout), amplitudes_);
}

// ---------------------------------------------------------------------------
// UnitaryOp

UnitaryOp::UnitaryOp(SubsystemLayout layout, CMatrix matrix) : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  require_same_dim("unitary rows", static_cast<std::size_t>(matrix_.rows()), layout_.total_dim());
  require_same_dim("unitary cols", static_cast<std::size_t>(matrix_.cols()), layout_.total_dim());
  if (!is_identity(matrix_.adjoint() * matrix_, kStructuralTol)) {
    throw std::invalid_argument("matrix is not unitary");
  }
}

UnitaryOp UnitaryOp::identity(SubsystemLayout layout) {
  const auto n = static_cast<Eigen::Index>(layout.total_dim());
  return UnitaryOp(std::move(layout), CMatrix::Identity(n, n));
}

UnitaryOp UnitaryOp::adjoint() const { return UnitaryOp(layout_, matrix_.adjoint()); }

UnitaryOp UnitaryOp::after(const UnitaryOp &first) const {
  require_same_dim("unitary composition", first.layout_.total_dim(), layout_.total_dim());
  return UnitaryOp(layout_, matrix_ * first.matrix_);
}

// ---------------------------------------------------------------------------
// Povm / ProjectiveMeasurement

Povm::Povm(std::vector<CMatrix> effects) : effects_(std::move(effects)) {
  if (effects_.empty()) {
    throw std::invalid_argument("POVM needs at least one effect");
  }
  dim_ = static_cast<std::size_t>(effects_.front().rows());
  if (dim_ == 0 || dim_ > kMaxTotalDim) {
    throw DimensionError(dims_message("POVM dimension", dim_, kMaxTotalDim));
  }
  const auto n = static_cast<Eigen::Index>(dim_);
  CMatrix sum = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k < effects_.size(); ++k) {
    const auto &e = effects_[k];
    if (e.rows() != n || e.cols() != n) {
      throw DimensionError("POVM effects must share one square dimension");
    }
    if ((e - e.adjoint()).cwiseAbs().maxCoeff() > kStructuralTol) {
      throw std::invalid_argument("POVM effect " + std::to_string(k) + " is not Hermitian");
    }
    const CMatrix herm = 0.5 * (e + e.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kStructuralTol) {
      throw std::invalid_argument("POVM effect " + std::to_string(k) + " is not positive semidefinite");
    }
    sum += e;
  }
  if (!is_identity(sum, kStructuralTol)) {
    throw std::invalid_argument("POVM effects do not sum to the identity");
  }
}

ProjectiveMeasurement::ProjectiveMeasurement(std::vector<CMatrix> projectors) : povm_(std::move(projectors)) {
  for (std::size_t k = 0; k < povm_.effects().size(); ++k) {
    const auto &p = povm_.effects()[k];
    if ((p * p - p).cwiseAbs().maxCoeff() > kStructuralTol) {
      throw std::invalid_argument("effect " + std::to_string(k) + " is not a projector");
    }
  }
}

ProjectiveMeasurement ProjectiveMeasurement::from_basis(std::span<const StateVector> basis) {
  if (basis.empty()) {
    throw std::invalid_argument("empty measurement basis");
  }
  const auto n = basis.front().dim();
  require_same_dim("basis size", basis.size(), n);
  std::vector<CMatrix> projectors;
  projectors.reserve(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    require_same_dim("basis vector", basis[i].dim(), n);
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(basis[j].amplitudes().dot(basis[i].amplitudes())) > kStructuralTol) {
        throw std::invalid_argument("measurement basis is not orthonormal");
      }
    }
    projectors.push_back(basis[i].amplitudes() * basis[i].amplitudes().adjoint());
  }
  return ProjectiveMeasurement(std::move(projectors));
}

ProjectiveMeasurement ProjectiveMeasurement::verification(const StateVector &phi) {
  const auto n = static_cast<Eigen::Index>(phi.dim());
  CMatrix p = phi.amplitudes() * phi.amplitudes().adjoint();
  CMatrix q = CMatrix::Identity(n, n) - p;
  return ProjectiveMeasurement({std::move(p), std::move(q)});
}

ProjectiveMeasurement ProjectiveMeasurement::on_subsystem(const SubsystemLayout &layout,
                                                          const std::string &label) const {
  const auto pos = layout.position(label);
  const auto &subs = layout.subsystems();
  require_same_dim("subsystem measurement", dim(), subs[pos].dim);
  std::size_t before = 1;
  std::size_t after = 1;
  for (std::size_t p = 0; p < subs.size(); ++p) {
    (p < pos ? before : after) *= (p == pos ? 1 : subs[p].dim);
  }
  const CMatrix left = CMatrix::Identity(static_cast<Eigen::Index>(before), static_cast<Eigen::Index>(before));
  const CMatrix right = CMatrix::Identity(static_cast<Eigen::Index>(after), static_cast<Eigen::Index>(after));
  std::vector<CMatrix> lifted;
  lifted.reserve(outcome_count());
  for (const auto &p : projectors()) {
    lifted.push_back(kron(kron(left, p), right));
  }
  return ProjectiveMeasurement(std::move(lifted));
}

// ---------------------------------------------------------------------------
// Direction

Direction::Direction(double polar, double azimuth) : polar_(polar), azimuth_(azimuth) {
  if (!(polar >= 0.0 && polar <= std::numbers::pi)) {
    throw std::invalid_argument("polar angle must lie in [0, pi]");
  }
  if (!(azimuth >= 0.0 && azimuth < 2.0 * std::numbers::pi)) {
    throw std::invalid_argument("azimuth must lie in [0, 2pi)");
  }
}

Direction Direction::x() { return {std::numbers::pi / 2.0, 0.0}; }
Direction Direction::y() { return {std::numbers::pi / 2.0, std::numbers::pi / 2.0}; }

Eigen::Vector3d Direction::bloch() const {
  return {std::sin(polar_) * std::cos(azimuth_), std::sin(polar_) * std::sin(azimuth_), std::cos(polar_)};
}

bool Direction::same_as(const Direction &other, double tol) const {
  return (bloch() - other.bloch()).norm() <= tol;
}

StateVector spin_state(const Direction &d, bool up, const std::string &label) {
  const double c = std::cos(d.polar() / 2.0);
  const double s = std::sin(d.polar() / 2.0);
  const Complex phase = std::polar(1.0, d.azimuth());
  CVector v(2);
  if (up) {
    v << c, phase * s;
  } else {
    v << -std::conj(phase) * s, c;
  }
  return StateVector(SubsystemLayout::single(label, 2), std::move(v));
}

ProjectiveMeasurement spin_measurement(const Direction &d) {
  const std::vector<StateVector> basis{spin_state(d, true), spin_state(d, false)};
  return ProjectiveMeasurement::from_basis(basis);
}

// ---------------------------------------------------------------------------
// Free operations

CMatrix kron(const CMatrix &a, const CMatrix &b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

StateVector tensor(const StateVector &a, const StateVector &b) {
  auto layout = a.layout().concat(b.layout());
  CVector v(static_cast<Eigen::Index>(layout.total_dim()));
  const auto nb = static_cast<Eigen::Index>(b.dim());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(a.dim()); ++i) {
    v.segment(i * nb, nb) = a.amplitudes()(i) * b.amplitudes();
  }
  return StateVector::normalized(std::move(layout), std::move(v));
}

StateVector tensor(std::span<const StateVector> factors) {
  if (factors.empty()) {
    throw std::invalid_argument("tensor of zero factors");
  }
  StateVector acc = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) {
    acc = tensor(acc, factors[i]);
  }
  return acc;
}

StateVector apply(const UnitaryOp &u, const StateVector &s) {
  require_same_dim("apply", u.layout().total_dim(), s.dim());
  if (!(u.layout() == s.layout())) {
    throw DimensionError("apply: unitary and state layouts differ");
  }
  CVector out = u.matrix() * s.amplitudes();
  return StateVector(s.layout(), std::move(out));
}

std::vector<double> born(const StateVector &s, const Povm &m) {
  require_same_dim("born", m.dim(), s.dim());
  std::vector<double> probs;
  probs.reserve(m.outcome_count());
  for (const auto &e : m.effects()) {
    probs.push_back(s.amplitudes().dot(e * s.amplitudes()).real());
  }
  return probs;
}

std::vector<double> born(const StateVector &s, const ProjectiveMeasurement &m) { return born(s, m.povm()); }

Complex inner(const StateVector &a, const StateVector &b) {
  require_same_dim("inner", a.dim(), b.dim());
  // Eigen's dot conjugates the left operand.
  return a.amplitudes().dot(b.amplitudes());
}

double fidelity(const StateVector &a, const StateVector &b) { return std::norm(inner(a, b)); }

StateVector project(const StateVector &s, const ProjectiveMeasurement &m, std::size_t outcome) {
  require_same_dim("project", m.dim(), s.dim());
  if (outcome >= m.outcome_count()) {
    throw std::out_of_range("measurement outcome out of range");
  }
  CVector v = m.projectors()[outcome] * s.amplitudes();
  const double norm = v.norm();
  if (norm * norm <= kStructuralTol) {
    throw std::domain_error("projection onto a zero-probability outcome");
  }
  v /= norm;
  return StateVector(s.layout(), std::move(v));
}

MeasurementResult measure(const StateVector &s, const ProjectiveMeasurement &m, std::mt19937_64 &rng) {
  const auto probs = born(s, m);
  const double u = uniform01(rng);
  double cumulative = 0.0;
  std::size_t chosen = probs.size();
  std::size_t last_possible = probs.size();
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= kStructuralTol) {
      continue;
    }
    last_possible = k;
    cumulative += probs[k];
    if (u < cumulative) {
      chosen = k;
      break;
    }
  }
  if (chosen == probs.size()) {
    // Rounding left u past the accumulated mass.
    chosen = last_possible;
  }
  return {chosen, probs[chosen], project(s, m, chosen)};
}

UnitaryOp embed(const UnitaryOp &local, const SubsystemLayout &layout, std::span<const std::string> targets) {
  const auto positions = target_positions(layout, targets);
  require_same_dim("embed", local.layout().total_dim(), product_dim(layout, positions));
  const auto split = split_indices(layout, positions);
  const auto n = layout.total_dim();
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (split.rest[i] == split.rest[j]) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            local.matrix()(static_cast<Eigen::Index>(split.local[i]), static_cast<Eigen::Index>(split.local[j]));
      }
    }
  }
  return UnitaryOp(layout, std::move(m));
}

UnitaryOp controlled(const SubsystemLayout &layout, const std::string &control, std::span<const std::string> targets,
                     const std::map<std::size_t, UnitaryOp> &branches) {
  const auto positions = target_positions(layout, targets);
  const auto control_pos = layout.position(control);
  if (std::find(positions.begin(), positions.end(), control_pos) != positions.end()) {
    throw std::invalid_argument("control subsystem cannot also be a target");
  }
  const auto local_dim = product_dim(layout, positions);
  for (const auto &[value, op] : branches) {
    if (value >= layout.subsystems()[control_pos].dim) {
      throw std::out_of_range("control value out of range");
    }
    require_same_dim("controlled branch", op.layout().total_dim(), local_dim);
  }
  // Control digit is part of `rest`, so equal rest keys imply equal control values.
  const auto split = split_indices(layout, positions);
  const auto n = layout.total_dim();
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = layout.digits(i)[control_pos];
    const auto it = branches.find(c);
    for (std::size_t j = 0; j < n; ++j) {
      if (split.rest[i] != split.rest[j]) {
        continue;
      }
      const auto li = static_cast<Eigen::Index>(split.local[i]);
      const auto lj = static_cast<Eigen::Index>(split.local[j]);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          it != branches.end() ? it->second.matrix()(li, lj) : Complex(li == lj ? 1.0 : 0.0);
    }
  }
  return UnitaryOp(layout, std::move(m));
}

} // namespace ontic_nogo::hilbert
