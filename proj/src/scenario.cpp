#include "ontic_nogo/scenario.hpp"

#include <algorithm>
#include <exception>
#include <set>
#include <stdexcept>
#include <thread>

namespace ontic_nogo::scenario {

using hilbert::CMatrix;
using hilbert::CVector;
using hilbert::ProjectiveMeasurement;
using hilbert::SubsystemLayout;

const char *to_string(Spin s) { return s == Spin::up ? "up" : "down"; }

const char *to_string(BasisId b) {
  switch (b) {
  case BasisId::z:
    return "z";
  case BasisId::n1:
    return "n1";
  case BasisId::n2:
    return "n2";
  }
  return "?";
}

const char *to_string(Superobserver w) { return w == Superobserver::W1 ? "W1" : "W2"; }
const char *to_string(Provenance p) { return p == Provenance::actual ? "actual" : "counterfactual"; }

// ---------------------------------------------------------------------------
// FriendModel / measurement unitary

FriendModel FriendModel::with_records(std::vector<RecordKey> records) {
  FriendModel f;
  f.ready_index_ = 0;
  std::size_t next = 1;
  for (auto &r : records) {
    if (!f.record_map_.emplace(std::move(r), next).second) {
      throw std::invalid_argument("duplicate friend record");
    }
    ++next;
  }
  return f;
}

std::size_t FriendModel::record_index(const std::string &basis, std::size_t outcome) const {
  const auto it = record_map_.find(RecordKey{basis, outcome});
  if (it == record_map_.end()) {
    throw std::out_of_range("friend has no record for basis '" + basis + "' outcome " + std::to_string(outcome));
  }
  return it->second;
}

UnitaryOp build_em_unitary(std::span<const StateVector> system_basis, const std::string &basis_id,
                           const FriendModel &friend_model, const std::string &system_label,
                           const std::string &friend_label) {
  if (system_basis.empty()) {
    throw std::invalid_argument("empty system basis");
  }
  const auto ds = system_basis.front().dim();
  if (system_basis.size() != ds) {
    throw std::invalid_argument("system basis must be complete");
  }
  CMatrix basis(static_cast<Eigen::Index>(ds), static_cast<Eigen::Index>(ds));
  for (std::size_t k = 0; k < ds; ++k) {
    if (system_basis[k].dim() != ds) {
      throw hilbert::DimensionError("system basis vectors differ in dimension");
    }
    basis.col(static_cast<Eigen::Index>(k)) = system_basis[k].amplitudes();
  }
  const auto gram = basis.adjoint() * basis;
  if ((gram - CMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > hilbert::kStructuralTol) {
    throw std::invalid_argument("system basis is not orthonormal");
  }

  const auto df = friend_model.record_dim();
  const auto ready = friend_model.ready_index();
  const auto n = static_cast<Eigen::Index>(ds * df);
  CMatrix perm = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k < ds; ++k) {
    const auto rec = friend_model.record_index(basis_id, k);
    for (std::size_t f = 0; f < df; ++f) {
      std::size_t target = f;
      if (f == ready) {
        target = rec;
      } else if (f == rec) {
        target = ready;
      }
      perm(static_cast<Eigen::Index>(k * df + target), static_cast<Eigen::Index>(k * df + f)) = 1.0;
    }
  }
  const CMatrix change = hilbert::kron(basis, CMatrix::Identity(static_cast<Eigen::Index>(df), static_cast<Eigen::Index>(df)));
  SubsystemLayout layout({{system_label, ds}, {friend_label, df}});
  return UnitaryOp(std::move(layout), change * perm * change.adjoint());
}

// ---------------------------------------------------------------------------
// Registry / verification / fidelities

void StateRegistry::add(std::string label, StateVector state) {
  states_.insert_or_assign(std::move(label), std::move(state));
}

const StateVector &StateRegistry::at(const std::string &label) const {
  const auto it = states_.find(label);
  if (it == states_.end()) {
    throw std::out_of_range("unknown state label '" + label + "'");
  }
  return it->second;
}

double verify_superobserver(const StateRegistry &registry, const StateVector &s, const std::string &target) {
  const auto m = ProjectiveMeasurement::verification(registry.at(target));
  return hilbert::born(s, m).front();
}

FidelityTable::FidelityTable(const StateRegistry &registry) {
  const auto &states = registry.states();
  for (auto a = states.begin(); a != states.end(); ++a) {
    for (auto b = std::next(a); b != states.end(); ++b) {
      if (a->second.dim() == b->second.dim()) {
        set(a->first, b->first, hilbert::fidelity(a->second, b->second));
      }
    }
  }
}

void FidelityTable::set(const std::string &a, const std::string &b, double fidelity) {
  pairs_[a < b ? std::pair{a, b} : std::pair{b, a}] = fidelity;
}

double FidelityTable::at(const std::string &a, const std::string &b) const {
  if (a == b) {
    return 1.0;
  }
  const auto it = pairs_.find(a < b ? std::pair{a, b} : std::pair{b, a});
  if (it == pairs_.end()) {
    throw std::out_of_range("no fidelity recorded for (" + a + ", " + b + ")");
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Ledger

LedgerEntry &EmncLedger::open(std::size_t trial_index, OnticToken token) {
  if (index_.count(token) != 0) {
    throw std::logic_error("ontic token " + token.str() + " already in the ledger");
  }
  index_[token] = entries_.size();
  entries_.push_back(LedgerEntry{trial_index, token, {}});
  return entries_.back();
}

void EmncLedger::claim(OnticToken token, MembershipClaim c) {
  if (c.provenance == Provenance::counterfactual && !no_superdeterminism_) {
    throw std::logic_error("counterfactual membership requires the no-superdeterminism assumption");
  }
  const auto it = index_.find(token);
  if (it == index_.end()) {
    throw std::out_of_range("ontic token " + token.str() + " not in the ledger");
  }
  entries_[it->second].claims.push_back(std::move(c));
}

const LedgerEntry &EmncLedger::entry(OnticToken token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) {
    throw std::out_of_range("ontic token " + token.str() + " not in the ledger");
  }
  return entries_[it->second];
}

std::size_t EmncLedger::multi_membership_count() const {
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [](const LedgerEntry &e) {
    std::set<std::string> states;
    for (const auto &c : e.claims) {
      states.insert(c.state);
    }
    return states.size() >= 2;
  }));
}

std::vector<ContradictionCertificate> derive_certificates(const EmncLedger &ledger, const FidelityTable &fidelities) {
  std::vector<ContradictionCertificate> out;
  for (const auto &e : ledger.entries()) {
    std::set<std::string> states;
    for (const auto &c : e.claims) {
      states.insert(c.state);
    }
    for (auto a = states.begin(); a != states.end(); ++a) {
      for (auto b = std::next(a); b != states.end(); ++b) {
        const double f = fidelities.at(*a, *b);
        if (f < 1.0 - hilbert::kStructuralTol) {
          out.push_back(ContradictionCertificate{e.trial_index, e.token, *a, *b, f, "violates-PBR-disjointness"});
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Free-choice protocol

void TrialRecord::validate() const {
  if (fprime_outcome == Spin::up && f_basis != BasisId::z) {
    throw std::logic_error("trial " + std::to_string(trial_index) + ": F' saw up but F did not measure z");
  }
  if (fprime_outcome == Spin::down) {
    if (f_basis == BasisId::z) {
      throw std::logic_error("trial " + std::to_string(trial_index) + ": F' saw down but F measured z");
    }
    const auto expected = f_basis == BasisId::n1 ? Superobserver::W1 : Superobserver::W2;
    if (routed_to != expected) {
      throw std::logic_error("trial " + std::to_string(trial_index) + ": n_i result routed to the wrong superobserver");
    }
  }
  const std::string expected_state = routed_to == Superobserver::W1 ? kPsiN1 : kPsiN2;
  if (assigned_state != expected_state) {
    throw std::logic_error("trial " + std::to_string(trial_index) + ": assigned state does not match routing");
  }
}

SubsystemLayout argument_one_layout() { return SubsystemLayout({{"S", 2}, {"F", 5}, {"S'", 2}, {"F'", 3}}); }

FriendModel argument_one_friend() { return FriendModel::with_records({{"z", 0}, {"z", 1}, {"n", 0}, {"n", 1}}); }

FriendModel argument_one_friend_prime() { return FriendModel::with_records({{"z", 0}, {"z", 1}}); }

namespace {

std::vector<StateVector> spin_basis(const Direction &d, const std::string &label) {
  return {hilbert::spin_state(d, true, label), hilbert::spin_state(d, false, label)};
}

} // namespace

UnitaryOp argument_one_lab_unitary(const Direction &n_i) {
  const auto layout = argument_one_layout();
  const auto f = argument_one_friend();
  const auto fp = argument_one_friend_prime();

  const auto u_sf_prime = build_em_unitary(spin_basis(Direction::z(), "S'"), "z", fp, "S'", "F'");
  const std::vector<std::string> prime_targets{"S'", "F'"};
  const auto first = hilbert::embed(u_sf_prime, layout, prime_targets);

  const std::map<std::size_t, UnitaryOp> branches{
      {fp.record_index("z", 0), build_em_unitary(spin_basis(Direction::z(), "S"), "z", f)},
      {fp.record_index("z", 1), build_em_unitary(spin_basis(n_i, "S"), "n", f)},
  };
  const std::vector<std::string> targets{"S", "F"};
  const auto second = hilbert::controlled(layout, "F'", targets, branches);
  return second.after(first);
}

StateVector build_psi_ni(int i, const Direction &n1, const Direction &n2) {
  if (i != 1 && i != 2) {
    throw std::invalid_argument("superobserver index must be 1 or 2");
  }
  const std::vector<StateVector> factors{
      hilbert::spin_state(Direction::x(), true, "S"),
      StateVector::basis(SubsystemLayout::single("F", 5), argument_one_friend().ready_index()),
      hilbert::spin_state(Direction::x(), true, "S'"),
      StateVector::basis(SubsystemLayout::single("F'", 3), argument_one_friend_prime().ready_index()),
  };
  return hilbert::apply(argument_one_lab_unitary(i == 1 ? n1 : n2), hilbert::tensor(factors));
}

std::mt19937_64 trial_rng(std::uint64_t root_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(root_seed), static_cast<std::uint32_t>(root_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

namespace {

const SubsystemLayout &friends_layout() {
  static const SubsystemLayout layout({{"S", 2}, {"S'", 2}});
  return layout;
}

} // namespace

ArgumentOneTrials::ArgumentOneTrials(const Direction &n1, const Direction &n2)
    : initial_(hilbert::tensor(hilbert::spin_state(Direction::x(), true, "S"),
                               hilbert::spin_state(Direction::x(), true, "S'"))),
      fprime_z_(hilbert::spin_measurement(Direction::z()).on_subsystem(friends_layout(), "S'")),
      f_z_(hilbert::spin_measurement(Direction::z()).on_subsystem(friends_layout(), "S")),
      f_n1_(hilbert::spin_measurement(n1).on_subsystem(friends_layout(), "S")),
      f_n2_(hilbert::spin_measurement(n2).on_subsystem(friends_layout(), "S")) {}

TrialRecord ArgumentOneTrials::simulate(std::size_t trial_index, std::mt19937_64 &rng) const {
  TrialRecord r;
  r.trial_index = trial_index;
  const auto fprime = hilbert::measure(initial_, fprime_z_, rng);
  r.fprime_outcome = spin_from_index(fprime.outcome);
  if (r.fprime_outcome == Spin::up) {
    r.f_basis = BasisId::z;
  } else {
    r.f_basis = hilbert::uniform01(rng) < 0.5 ? BasisId::n1 : BasisId::n2;
  }
  const auto &m = r.f_basis == BasisId::z ? f_z_ : (r.f_basis == BasisId::n1 ? f_n1_ : f_n2_);
  r.f_outcome = spin_from_index(hilbert::measure(fprime.post_state, m, rng).outcome);
  switch (r.f_basis) {
  case BasisId::z:
    // The free agent's coin.
    r.routed_to = hilbert::uniform01(rng) < 0.5 ? Superobserver::W1 : Superobserver::W2;
    break;
  case BasisId::n1:
    r.routed_to = Superobserver::W1;
    break;
  case BasisId::n2:
    r.routed_to = Superobserver::W2;
    break;
  }
  r.assigned_state = r.routed_to == Superobserver::W1 ? kPsiN1 : kPsiN2;
  return r;
}

ArgumentOneResult run_argument_one(const ArgumentOneConfig &config) {
  if (config.trials < 1) {
    throw std::invalid_argument("need at least one trial");
  }
  ArgumentOneResult result;
  if (config.n1.same_as(config.n2)) {
    result.warnings.push_back("n1 and n2 coincide; both superobservers assign the same state");
  }
  result.registry.add(kPsiN1, build_psi_ni(1, config.n1, config.n2));
  result.registry.add(kPsiN2, build_psi_ni(2, config.n1, config.n2));
  result.fidelities = FidelityTable(result.registry);

  const ArgumentOneTrials sim(config.n1, config.n2);
  result.records.resize(config.trials);
  const auto threads = std::clamp<std::size_t>(config.threads, 1, config.trials);
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    const auto chunk = (config.trials + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          const auto end = std::min(config.trials, (t + 1) * chunk);
          for (auto i = t * chunk; i < end; ++i) {
            auto rng = trial_rng(config.seed, i);
            result.records[i] = sim.simulate(i, rng);
          }
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto &e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }

  result.ledger = EmncLedger(config.no_superdeterminism);
  for (const auto &r : result.records) {
    r.validate();
    const OnticToken token{r.trial_index};
    result.ledger.open(r.trial_index, token);
    result.ledger.claim(token, {r.assigned_state, Provenance::actual, "end-of-trial"});
    if (r.f_basis == BasisId::z && config.no_superdeterminism) {
      // The same λ could have been routed to the other superobserver.
      const std::string other = r.assigned_state == kPsiN1 ? kPsiN2 : kPsiN1;
      result.ledger.claim(token, {other, Provenance::counterfactual, "end-of-trial"});
    }
  }
  result.certificates = derive_certificates(result.ledger, result.fidelities);
  const auto &psi1 = result.registry.at(kPsiN1);
  const auto &psi2 = result.registry.at(kPsiN2);
  result.overlap = optimize::make_overlap_report(optimize::bclm_bound(psi1, psi2, psi1.dim()),
                                                 !result.certificates.empty());
  return result;
}

// ---------------------------------------------------------------------------
// Null-signal protocol

SubsystemLayout argument_two_layout() { return SubsystemLayout({{"S", 2}, {"F", 3}, {"L", 2}}); }

namespace {

FriendModel argument_two_friend() { return FriendModel::with_records({{"z", 0}, {"z", 1}}); }

UnitaryOp argument_two_measurement_unitary() {
  const std::vector<std::string> targets{"S", "F"};
  return hilbert::embed(build_em_unitary(spin_basis(Direction::z(), "S"), "z", argument_two_friend()),
                        argument_two_layout(), targets);
}

StateVector argument_two_initial() {
  const std::vector<StateVector> factors{
      hilbert::spin_state(Direction::x(), true, "S"),
      StateVector::basis(SubsystemLayout::single("F", 3), argument_two_friend().ready_index()),
      StateVector::basis(SubsystemLayout::single("L", 2), 0),
  };
  return hilbert::tensor(factors);
}

StateVector lab_basis_state(std::size_t s, std::size_t f, std::size_t l) {
  const auto layout = argument_two_layout();
  const std::vector<std::size_t> digits{s, f, l};
  return StateVector::basis(layout, layout.index(digits));
}

} // namespace

UnitaryOp argument_two_signal_unitary() {
  const auto layout = argument_two_layout();
  CMatrix flip(2, 2);
  flip << 0.0, 1.0, 1.0, 0.0;
  const std::map<std::size_t, UnitaryOp> branches{
      {argument_two_friend().record_index("z", 1), UnitaryOp(SubsystemLayout::single("L", 2), flip)}};
  const std::vector<std::string> targets{"L"};
  return hilbert::controlled(layout, "F", targets, branches);
}

StateVector build_null_signal_state() {
  return hilbert::apply(argument_two_signal_unitary(),
                        hilbert::apply(argument_two_measurement_unitary(), argument_two_initial()));
}

ArgumentTwoResult run_argument_two(const ArgumentTwoConfig &config) {
  if (!(config.t0 > 0.0)) {
    throw std::invalid_argument("t0 must be positive");
  }
  const auto layout = argument_two_layout();
  const auto friend_model = argument_two_friend();
  const auto up_rec = friend_model.record_index("z", 0);
  const auto down_rec = friend_model.record_index("z", 1);

  StateRegistry registry;
  registry.add(kPsiNullSignal, build_null_signal_state());
  registry.add(kUpProduct, lab_basis_state(0, up_rec, 0));
  registry.add(kDownProduct, lab_basis_state(1, down_rec, 1));
  FidelityTable fidelities(registry);

  // F's outcome at t = 0, seen from inside the lab.
  const auto after_measurement = hilbert::apply(argument_two_measurement_unitary(), argument_two_initial());
  const auto f_z = hilbert::spin_measurement(Direction::z()).on_subsystem(layout, "S");
  std::size_t outcome = 0;
  double probability = 0.0;
  std::optional<StateVector> state0;
  if (config.forced_outcome) {
    outcome = outcome_index(*config.forced_outcome);
    probability = hilbert::born(after_measurement, f_z)[outcome];
    state0 = hilbert::project(after_measurement, f_z, outcome);
  } else {
    auto rng = trial_rng(config.seed, 0);
    auto m = hilbert::measure(after_measurement, f_z, rng);
    outcome = m.outcome;
    probability = m.probability;
    state0 = std::move(m.post_state);
  }

  // Lab evolution over (0, t0): the signal fires only from the down record.
  auto state_t0 = hilbert::apply(argument_two_signal_unitary(), *state0);
  const bool null_signal = (state_t0.amplitudes().array() == state0->amplitudes().array()).all();
  const auto l_measurement =
      hilbert::spin_measurement(Direction::z()).on_subsystem(layout, "L");
  const bool signal_received = hilbert::born(state_t0, l_measurement)[1] > 0.5;
  const std::string assigned_at_t0 = signal_received ? kDownProduct : kUpProduct;

  EmncLedger ledger(false);
  const OnticToken token0{0};
  ledger.open(0, token0);
  ledger.claim(token0, {kPsiNullSignal, Provenance::actual, "(0,t0)"});
  OnticToken token_t0 = token0;
  if (!null_signal) {
    token_t0 = OnticToken{1};
    ledger.open(0, token_t0);
  }
  ledger.claim(token_t0, {assigned_at_t0, Provenance::actual, "t0"});

  const auto certificates = derive_certificates(ledger, fidelities);
  std::optional<ContradictionCertificate> certificate;
  if (!certificates.empty()) {
    certificate = certificates.front();
  }
  const auto &psi = registry.at(kPsiNullSignal);
  auto overlap = optimize::make_overlap_report(optimize::bclm_bound(psi, registry.at(assigned_at_t0), psi.dim()),
                                               certificate.has_value());

  return ArgumentTwoResult{
      .f_outcome = spin_from_index(outcome),
      .outcome_probability = probability,
      .ledger = std::move(ledger),
      .token_at_0 = token0,
      .token_at_t0 = token_t0,
      .lab_state_0 = std::move(*state0),
      .lab_state_t0 = std::move(state_t0),
      .null_signal = null_signal,
      .assigned_before_t0 = kPsiNullSignal,
      .assigned_at_t0 = assigned_at_t0,
      .registry = std::move(registry),
      .fidelities = std::move(fidelities),
      .certificate = std::move(certificate),
      .overlap = overlap,
  };
}

// ---------------------------------------------------------------------------
// Basic encapsulated measurement

EmBasicResult run_em_basic(std::uint64_t seed, std::size_t repeats) {
  const auto friend_model = FriendModel::with_records({{"z", 0}, {"z", 1}});
  const auto u = build_em_unitary(spin_basis(Direction::z(), "S"), "z", friend_model);
  const auto initial = hilbert::tensor(hilbert::spin_state(Direction::x(), true, "S"),
                                       StateVector::basis(SubsystemLayout::single("F", 3), friend_model.ready_index()));
  auto phi = hilbert::apply(u, initial);

  std::vector<StateVector> records;
  for (std::size_t f = 0; f < friend_model.record_dim(); ++f) {
    records.push_back(StateVector::basis(SubsystemLayout::single("F", 3), f));
  }
  const auto record_probs =
      hilbert::born(phi, ProjectiveMeasurement::from_basis(records).on_subsystem(phi.layout(), "F"));

  EmBasicResult r{.phi = phi,
                  .branch_probabilities = {record_probs[friend_model.record_index("z", 0)],
                                           record_probs[friend_model.record_index("z", 1)]},
                  .verification_probability = 0.0,
                  .verification_outcomes = {},
                  .min_post_fidelity = 1.0};
  const auto verification = ProjectiveMeasurement::verification(phi);
  r.verification_probability = hilbert::born(phi, verification).front();
  auto rng = trial_rng(seed, 0);
  auto state = phi;
  for (std::size_t i = 0; i < repeats; ++i) {
    auto m = hilbert::measure(state, verification, rng);
    r.verification_outcomes.push_back(m.outcome);
    r.min_post_fidelity = std::min(r.min_post_fidelity, hilbert::fidelity(m.post_state, phi));
    state = std::move(m.post_state);
  }
  return r;
}

} // namespace ontic_nogo::scenario
