#pragma once

// Encapsulated-measurement scenarios: the friend/superobserver unitaries, the
// free-choice protocol with two superobservers, the null-signal protocol, and
// the ledger of support-membership claims that observer-independence of the
// lab's ontic state forces.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ontic_nogo/hilbert.hpp"
#include "ontic_nogo/overlap.hpp"

namespace ontic_nogo::scenario {

using hilbert::Direction;
using hilbert::StateVector;
using hilbert::UnitaryOp;

enum class Spin { up, down };
enum class BasisId { z, n1, n2 };
enum class Superobserver { W1, W2 };
enum class Provenance { actual, counterfactual };

const char *to_string(Spin s);
const char *to_string(BasisId b);
const char *to_string(Superobserver w);
const char *to_string(Provenance p);

inline std::size_t outcome_index(Spin s) { return s == Spin::up ? 0 : 1; }
inline Spin spin_from_index(std::size_t k) { return k == 0 ? Spin::up : Spin::down; }

// State labels used in ledgers and reports.
inline constexpr const char *kPsiN1 = "Psi_n1";
inline constexpr const char *kPsiN2 = "Psi_n2";
inline constexpr const char *kPsiNullSignal = "Psi";
inline constexpr const char *kUpProduct = "up_z_Fup_0L";
inline constexpr const char *kDownProduct = "down_z_Fdown_1L";

/// Key of one friend record: (measured basis id, outcome index).
struct RecordKey {
  std::string basis;
  std::size_t outcome = 0;
  auto operator<=>(const RecordKey &) const = default;
};

/// The friend's pointer: a ready level plus one orthogonal level per record.
class FriendModel {
public:
  /// ready_index 0, records 1..n in the order given.
  static FriendModel with_records(std::vector<RecordKey> records);

  std::size_t record_dim() const { return 1 + record_map_.size(); }
  std::size_t ready_index() const { return ready_index_; }
  /// Throws std::out_of_range if the record is not modeled.
  std::size_t record_index(const std::string &basis, std::size_t outcome) const;
  const std::map<RecordKey, std::size_t> &record_map() const { return record_map_; }

private:
  std::size_t ready_index_ = 0;
  std::map<RecordKey, std::size_t> record_map_;
};

/// |s_k⟩|ready⟩ → |s_k⟩|record(basis_id, k)⟩ on system ⊗ friend, completed to a
/// unitary by swapping ready ↔ record(k) in the k-th system sector. All branch
/// phases are +1. Throws std::invalid_argument for a non-orthonormal basis.
UnitaryOp build_em_unitary(std::span<const StateVector> system_basis, const std::string &basis_id,
                           const FriendModel &friend_model, const std::string &system_label = "S",
                           const std::string &friend_label = "F");

// ---------------------------------------------------------------------------
// Labeled states and the superobserver's verification

class StateRegistry {
public:
  void add(std::string label, StateVector state);
  /// Throws std::out_of_range for an unknown label.
  const StateVector &at(const std::string &label) const;
  bool contains(const std::string &label) const { return states_.count(label) != 0; }
  const std::map<std::string, StateVector> &states() const { return states_; }

private:
  std::map<std::string, StateVector> states_;
};

/// Probability that {|t⟩⟨t|, I − |t⟩⟨t|} with t = registry[target] yields outcome 0 on s.
double verify_superobserver(const StateRegistry &registry, const StateVector &s, const std::string &target);

/// Symmetric |⟨a|b⟩|² lookup keyed by state label.
class FidelityTable {
public:
  FidelityTable() = default;
  /// All pairs of the registry.
  explicit FidelityTable(const StateRegistry &registry);

  void set(const std::string &a, const std::string &b, double fidelity);
  /// Throws std::out_of_range if the pair is unknown; 1 for a == b.
  double at(const std::string &a, const std::string &b) const;
  const std::map<std::pair<std::string, std::string>, double> &pairs() const { return pairs_; }

private:
  std::map<std::pair<std::string, std::string>, double> pairs_;
};

// ---------------------------------------------------------------------------
// Ledger

/// Opaque name for the lab's (unknown) ontic state at some moment.
struct OnticToken {
  std::uint64_t id = 0;
  auto operator<=>(const OnticToken &) const = default;
  std::string str() const { return "lambda#" + std::to_string(id); }
};

struct MembershipClaim {
  std::string state;
  Provenance provenance = Provenance::actual;
  /// When the claim is made, e.g. "end-of-trial", "(0,t0)", "t0".
  std::string epoch;
  bool operator==(const MembershipClaim &) const = default;
};

struct LedgerEntry {
  std::size_t trial_index = 0;
  OnticToken token;
  std::vector<MembershipClaim> claims;
  bool operator==(const LedgerEntry &) const = default;
};

class EmncLedger {
public:
  explicit EmncLedger(bool no_superdeterminism) : no_superdeterminism_(no_superdeterminism) {}

  /// Adds an entry for a token not yet present; throws on reuse.
  LedgerEntry &open(std::size_t trial_index, OnticToken token);
  /// Appends a claim to an existing token's entry. Counterfactual claims are
  /// rejected unless no-superdeterminism is assumed.
  void claim(OnticToken token, MembershipClaim c);

  bool no_superdeterminism() const { return no_superdeterminism_; }
  const std::vector<LedgerEntry> &entries() const { return entries_; }
  const LedgerEntry &entry(OnticToken token) const;

  /// Entries whose claims name at least two distinct states.
  std::size_t multi_membership_count() const;

private:
  bool no_superdeterminism_;
  std::vector<LedgerEntry> entries_;
  std::map<OnticToken, std::size_t> index_;
};

struct ContradictionCertificate {
  std::size_t trial_index = 0;
  OnticToken token;
  std::string state_a;
  std::string state_b;
  double fidelity = 0.0;
  std::string verdict = "violates-PBR-disjointness";
  bool operator==(const ContradictionCertificate &) const = default;
};

/// One certificate per entry and per unordered pair of distinct claimed states
/// whose fidelity is below 1 − kStructuralTol; pairs in lexicographic order.
std::vector<ContradictionCertificate> derive_certificates(const EmncLedger &ledger, const FidelityTable &fidelities);

// ---------------------------------------------------------------------------
// Free-choice protocol with two superobservers

struct TrialRecord {
  std::size_t trial_index = 0;
  Spin fprime_outcome = Spin::up;
  BasisId f_basis = BasisId::z;
  Spin f_outcome = Spin::up;
  Superobserver routed_to = Superobserver::W1;
  std::string assigned_state;

  /// Throws std::logic_error when the record breaks the protocol.
  void validate() const;
  bool operator==(const TrialRecord &) const = default;
};

/// S(2) ⊗ F(5) ⊗ S'(2) ⊗ F'(3).
hilbert::SubsystemLayout argument_one_layout();
/// F's records as modeled by W_i: ready, z±, n_i±.
FriendModel argument_one_friend();
/// F′'s records: ready, z±.
FriendModel argument_one_friend_prime();

/// W_i's model of the whole trial: U_SF (controlled by F′'s record) ∘ U_S′F′.
UnitaryOp argument_one_lab_unitary(const Direction &n_i);

/// |Ψ_{n̂ᵢ}⟩, the state W_i assigns to the lab.
StateVector build_psi_ni(int i, const Direction &n1, const Direction &n2);

/// Independent generator for trial `index` under `root_seed`.
std::mt19937_64 trial_rng(std::uint64_t root_seed, std::uint64_t index);

struct ArgumentOneConfig {
  Direction n1 = Direction::z();
  Direction n2 = Direction::x();
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  bool no_superdeterminism = true;
  std::size_t threads = 1;
};

struct ArgumentOneResult {
  std::vector<TrialRecord> records;
  EmncLedger ledger{true};
  std::vector<ContradictionCertificate> certificates;
  StateRegistry registry;
  FidelityTable fidelities;
  optimize::OverlapReport overlap;
  std::vector<std::string> warnings;
};

/// The friends' side of the protocol on S ⊗ S′: F′ measures S′ along z, F
/// measures S along z or a coin-chosen n̂ᵢ, and the record is routed.
class ArgumentOneTrials {
public:
  ArgumentOneTrials(const Direction &n1, const Direction &n2);

  /// Simulates one trial from its own generator.
  TrialRecord simulate(std::size_t trial_index, std::mt19937_64 &rng) const;

private:
  StateVector initial_;
  hilbert::ProjectiveMeasurement fprime_z_;
  hilbert::ProjectiveMeasurement f_z_;
  hilbert::ProjectiveMeasurement f_n1_;
  hilbert::ProjectiveMeasurement f_n2_;
};

/// Throws std::invalid_argument if trials < 1.
ArgumentOneResult run_argument_one(const ArgumentOneConfig &config);

// ---------------------------------------------------------------------------
// Null-signal protocol

/// S(2) ⊗ F(3) ⊗ L(2).
hilbert::SubsystemLayout argument_two_layout();
/// |1⟩_L flipped on F's spin-down record, identity otherwise.
UnitaryOp argument_two_signal_unitary();
/// (1/√2)(|+z⟩|F+⟩|0⟩_L + |−z⟩|F−⟩|1⟩_L).
StateVector build_null_signal_state();

struct ArgumentTwoConfig {
  double t0 = 1.0;
  std::uint64_t seed = 0;
  /// Postselects F's outcome instead of sampling it.
  std::optional<Spin> forced_outcome;
};

struct ArgumentTwoResult {
  Spin f_outcome = Spin::up;
  double outcome_probability = 0.0;
  EmncLedger ledger{false};
  OnticToken token_at_0;
  OnticToken token_at_t0;
  /// Lab state right after F's outcome, and after the (0, t0) evolution.
  StateVector lab_state_0;
  StateVector lab_state_t0;
  bool null_signal = false;
  std::string assigned_before_t0;
  std::string assigned_at_t0;
  StateRegistry registry;
  FidelityTable fidelities;
  std::optional<ContradictionCertificate> certificate;
  optimize::OverlapReport overlap;
};

/// Throws std::invalid_argument if t0 ≤ 0.
ArgumentTwoResult run_argument_two(const ArgumentTwoConfig &config);

// ---------------------------------------------------------------------------
// Basic encapsulated measurement

struct EmBasicResult {
  StateVector phi;
  /// Born probabilities of F's records (F+, F−).
  std::vector<double> branch_probabilities;
  double verification_probability = 0.0;
  /// Outcome of each repeated verification and the post-state fidelity to Φ.
  std::vector<std::size_t> verification_outcomes;
  double min_post_fidelity = 1.0;
};

/// |+x⟩|F0⟩ → |Φ⟩, then `repeats` rounds of W's verification.
EmBasicResult run_em_basic(std::uint64_t seed, std::size_t repeats = 3);

} // namespace ontic_nogo::scenario
