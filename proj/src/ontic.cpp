#include "ontic_nogo/ontic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace ontic_nogo::ontic {

namespace {

void check_permutation(std::span<const std::size_t> order, std::size_t n) {
  if (order.size() != n) {
    throw std::invalid_argument("permutation has the wrong length");
  }
  std::vector<bool> seen(n, false);
  for (auto i : order) {
    if (i >= n || seen[i]) {
      throw std::invalid_argument("not a permutation");
    }
    seen[i] = true;
  }
}

void check_same_space(const EpistemicState &a, const EpistemicState &b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("epistemic states live on different ontic spaces");
  }
}

} // namespace

// ---------------------------------------------------------------------------
// MeasurementSet

MeasurementSet::MeasurementSet(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) {
    throw std::invalid_argument("measurement set must be nonempty");
  }
  dim_ = entries_.front().povm.dim();
  std::set<std::string> ids;
  for (const auto &e : entries_) {
    if (!ids.insert(e.id).second) {
      throw std::invalid_argument("duplicate measurement id '" + e.id + "'");
    }
    if (e.povm.dim() != dim_) {
      throw hilbert::DimensionError("measurements act on different dimensions");
    }
  }
}

MeasurementSet MeasurementSet::spins(const std::vector<std::pair<std::string, hilbert::Direction>> &directions) {
  std::vector<Entry> entries;
  for (const auto &[id, d] : directions) {
    entries.push_back({id, hilbert::spin_measurement(d).povm()});
  }
  return MeasurementSet(std::move(entries));
}

std::vector<std::size_t> MeasurementSet::outcome_counts() const {
  std::vector<std::size_t> counts;
  counts.reserve(entries_.size());
  for (const auto &e : entries_) {
    counts.push_back(e.povm.outcome_count());
  }
  return counts;
}

std::size_t MeasurementSet::index_of(const std::string &id) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id == id) {
      return i;
    }
  }
  throw std::out_of_range("no measurement with id '" + id + "'");
}

MeasurementSet MeasurementSet::with(std::string id, hilbert::Povm povm) const {
  auto entries = entries_;
  entries.push_back({std::move(id), std::move(povm)});
  return MeasurementSet(std::move(entries));
}

MeasurementSet MeasurementSet::permuted(std::span<const std::size_t> order) const {
  check_permutation(order, entries_.size());
  std::vector<Entry> entries;
  entries.reserve(order.size());
  for (auto i : order) {
    entries.push_back(entries_[i]);
  }
  return MeasurementSet(std::move(entries));
}

MeasurementSet MeasurementSet::local_copies(std::size_t copies) const {
  if (copies < 1) {
    throw std::invalid_argument("need at least one copy");
  }
  const auto d = static_cast<Eigen::Index>(dim_);
  std::vector<Entry> entries;
  for (std::size_t c = 0; c < copies; ++c) {
    for (const auto &e : entries_) {
      std::vector<hilbert::CMatrix> effects;
      for (const auto &eff : e.povm.effects()) {
        hilbert::CMatrix lifted = hilbert::CMatrix::Identity(1, 1);
        for (std::size_t k = 0; k < copies; ++k) {
          lifted = hilbert::kron(lifted, k == c ? eff : hilbert::CMatrix::Identity(d, d));
        }
        effects.push_back(std::move(lifted));
      }
      entries.push_back({e.id + "@" + std::to_string(c), hilbert::Povm(std::move(effects))});
    }
  }
  return MeasurementSet(std::move(entries));
}

// ---------------------------------------------------------------------------
// OnticSpace

OnticSpace::OnticSpace(std::vector<std::size_t> outcome_counts, std::vector<Assignment> lambdas)
    : outcome_counts_(std::move(outcome_counts)), lambdas_(std::move(lambdas)) {
  std::set<Assignment> seen;
  for (const auto &a : lambdas_) {
    if (a.size() != outcome_counts_.size()) {
      throw std::invalid_argument("assignment length differs from measurement count");
    }
    for (std::size_t m = 0; m < a.size(); ++m) {
      if (a[m] >= outcome_counts_[m]) {
        throw std::invalid_argument("assignment outcome out of range");
      }
    }
    if (!seen.insert(a).second) {
      throw std::invalid_argument("duplicate ontic assignment");
    }
  }
}

OnticSpace OnticSpace::permuted(std::span<const std::size_t> order) const {
  check_permutation(order, lambdas_.size());
  std::vector<Assignment> lambdas;
  lambdas.reserve(order.size());
  for (auto i : order) {
    lambdas.push_back(lambdas_[i]);
  }
  return OnticSpace(outcome_counts_, std::move(lambdas));
}

OnticSpace OnticSpace::with_measurements_permuted(std::span<const std::size_t> order) const {
  check_permutation(order, outcome_counts_.size());
  std::vector<std::size_t> counts;
  for (auto i : order) {
    counts.push_back(outcome_counts_[i]);
  }
  std::vector<Assignment> lambdas;
  lambdas.reserve(lambdas_.size());
  for (const auto &a : lambdas_) {
    Assignment b;
    for (auto i : order) {
      b.push_back(a[i]);
    }
    lambdas.push_back(std::move(b));
  }
  return OnticSpace(std::move(counts), std::move(lambdas));
}

OnticSpace enumerate_lambdas(const MeasurementSet &ms, std::size_t cap) {
  const auto counts = ms.outcome_counts();
  std::size_t total = 1;
  for (auto c : counts) {
    if (c == 0 || total > cap / c) {
      throw EnumerationCapExceeded("ontic enumeration exceeds cap of " + std::to_string(cap));
    }
    total *= c;
  }
  std::vector<OnticSpace::Assignment> lambdas;
  lambdas.reserve(total);
  OnticSpace::Assignment current(counts.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    lambdas.push_back(current);
    // Odometer increment, last measurement fastest.
    for (std::size_t m = counts.size(); m-- > 0;) {
      if (++current[m] < counts[m]) {
        break;
      }
      current[m] = 0;
    }
  }
  return OnticSpace(counts, std::move(lambdas));
}

// ---------------------------------------------------------------------------
// EpistemicState

EpistemicState::EpistemicState(std::string label, std::vector<double> weights)
    : label_(std::move(label)), weights_(std::move(weights)) {
  if (weights_.empty()) {
    throw std::invalid_argument("epistemic state over an empty ontic space");
  }
  double sum = 0.0;
  for (auto w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("epistemic weight must be finite and nonnegative");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kNormalizationTol) {
    throw std::invalid_argument("epistemic weights do not sum to 1");
  }
}

std::vector<std::size_t> EpistemicState::support(double epsilon) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] > epsilon) {
      out.push_back(i);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// ResponseTable / OnticModel

ResponseTable::ResponseTable(std::vector<Eigen::MatrixXd> tables) : tables_(std::move(tables)) {
  for (const auto &t : tables_) {
    if (t.size() == 0) {
      throw std::invalid_argument("empty response table");
    }
    if (t.minCoeff() < 0.0) {
      throw std::invalid_argument("response probabilities must be nonnegative");
    }
    if ((t.rowwise().sum().array() - 1.0).abs().maxCoeff() > kNormalizationTol) {
      throw std::invalid_argument("response rows must sum to 1");
    }
  }
}

ResponseTable ResponseTable::deterministic(const OnticSpace &space) {
  const auto &counts = space.outcome_counts();
  std::vector<Eigen::MatrixXd> tables;
  for (std::size_t m = 0; m < counts.size(); ++m) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(space.size()), static_cast<Eigen::Index>(counts[m]));
    for (std::size_t l = 0; l < space.size(); ++l) {
      t(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(space.outcome(l, m))) = 1.0;
    }
    tables.push_back(std::move(t));
  }
  return ResponseTable(std::move(tables));
}

OnticModel::OnticModel(OnticSpace space, std::vector<EpistemicState> epistemics)
    : OnticModel(space, std::move(epistemics), ResponseTable::deterministic(space)) {}

OnticModel::OnticModel(OnticSpace space, std::vector<EpistemicState> epistemics, ResponseTable response)
    : space_(std::move(space)), epistemics_(std::move(epistemics)), response_(std::move(response)) {
  std::set<std::string> labels;
  for (const auto &e : epistemics_) {
    if (e.size() != space_.size()) {
      throw std::invalid_argument("epistemic state '" + e.label() + "' has the wrong length");
    }
    if (!labels.insert(e.label()).second) {
      throw std::invalid_argument("duplicate epistemic label '" + e.label() + "'");
    }
  }
  const auto &counts = space_.outcome_counts();
  if (response_.measurement_count() != counts.size()) {
    throw std::invalid_argument("response table measurement count mismatch");
  }
  for (std::size_t m = 0; m < counts.size(); ++m) {
    const auto &t = response_.table(m);
    if (static_cast<std::size_t>(t.rows()) != space_.size() || static_cast<std::size_t>(t.cols()) != counts[m]) {
      throw std::invalid_argument("response table shape mismatch");
    }
  }
}

const EpistemicState &OnticModel::epistemic(const std::string &label) const {
  for (const auto &e : epistemics_) {
    if (e.label() == label) {
      return e;
    }
  }
  throw std::out_of_range("no epistemic state for '" + label + "'");
}

// ---------------------------------------------------------------------------
// Checks

ReproductionReport check_reproduction(const OnticModel &model, const std::map<std::string, hilbert::StateVector> &states,
                                      const MeasurementSet &ms) {
  if (ms.outcome_counts() != model.space().outcome_counts()) {
    throw std::invalid_argument("measurement set does not match the model's ontic space");
  }
  ReproductionReport report;
  for (const auto &[label, psi] : states) {
    const auto &weights = model.epistemic(label).weights();
    for (std::size_t m = 0; m < ms.size(); ++m) {
      const auto quantum = hilbert::born(psi, ms[m].povm);
      for (std::size_t k = 0; k < quantum.size(); ++k) {
        double classical = 0.0;
        for (std::size_t l = 0; l < weights.size(); ++l) {
          classical += weights[l] * model.response()(k, l, m);
        }
        const double r = std::abs(classical - quantum[k]);
        if (r > report.max_residual) {
          report.max_residual = r;
          report.worst_state = label;
          report.worst_measurement = m;
          report.worst_outcome = k;
        }
      }
    }
  }
  report.pass = report.max_residual <= kReproductionTol;
  return report;
}

double classical_overlap(const EpistemicState &a, const EpistemicState &b) {
  check_same_space(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += std::min(a.weights()[i], b.weights()[i]);
  }
  return std::clamp(sum, 0.0, 1.0);
}

double classical_overlap(std::span<const EpistemicState> states) {
  if (states.size() < 2) {
    throw std::invalid_argument("overlap needs at least two distributions");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < states.front().size(); ++i) {
    double m = states.front().weights()[i];
    for (const auto &s : states.subspan(1)) {
      check_same_space(states.front(), s);
      m = std::min(m, s.weights()[i]);
    }
    sum += m;
  }
  return std::clamp(sum, 0.0, 1.0);
}

bool supports_disjoint(const EpistemicState &a, const EpistemicState &b, double epsilon) {
  check_same_space(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.weights()[i] > epsilon && b.weights()[i] > epsilon) {
      return false;
    }
  }
  return true;
}

bool certain_on_support(const OnticModel &model, const std::string &label, std::size_t measurement,
                        std::size_t outcome) {
  for (auto l : model.epistemic(label).support()) {
    if (std::abs(model.response()(outcome, l, measurement) - 1.0) > kReproductionTol) {
      return false;
    }
  }
  return true;
}

} // namespace ontic_nogo::ontic
