#pragma once

// Stable machine-readable run reports.
//
// Canonical JSON: object keys sorted, no insignificant whitespace, doubles
// printed with 17 significant digits ("%.17g"), integers verbatim, one
// trailing newline. Equal inputs give byte-identical documents, and parsing a
// canonical document then re-emitting it reproduces it exactly.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ontic_nogo/overlap.hpp"
#include "ontic_nogo/scenario.hpp"

namespace ontic_nogo::report {

inline constexpr const char *kSchemaVersion = "1";

struct RunReport {
  /// "argument-one", "argument-two", "em-basic", "overlap-lp" or "bclm".
  std::string scenario;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<scenario::TrialRecord> trials;
  std::optional<scenario::EmncLedger> ledger;
  scenario::FidelityTable fidelities;
  std::vector<scenario::ContradictionCertificate> certificates;
  std::optional<optimize::OverlapReport> overlap;
  /// Scenario-specific results.
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> warnings;
  /// Wall-clock seconds; only emitted when set.
  std::optional<double> timing_seconds;
};

/// Deterministic id: FNV-1a 64 over the canonical config and seed, hex.
std::string run_id(const nlohmann::json &config, std::uint64_t seed);

nlohmann::json to_json(const RunReport &r);
nlohmann::json to_json(const scenario::TrialRecord &r);
nlohmann::json to_json(const scenario::EmncLedger &ledger);
nlohmann::json to_json(const scenario::ContradictionCertificate &c);
nlohmann::json to_json(const optimize::OverlapReport &o);
nlohmann::json to_json(const scenario::FidelityTable &t);

scenario::EmncLedger ledger_from_json(const nlohmann::json &j);
scenario::FidelityTable fidelities_from_json(const nlohmann::json &j);
std::vector<scenario::ContradictionCertificate> certificates_from_json(const nlohmann::json &j);

/// Canonical serialization of any JSON value, newline-terminated.
std::string canonical_dump(const nlohmann::json &j);

std::string emit_json(const RunReport &r);

/// Header `trial,fprime,f_basis,f_outcome,routed_to,assigned_state`, one row
/// per record.
std::string emit_trials_csv(std::span<const scenario::TrialRecord> records);

/// Re-derives certificates from a parsed report's ledger and fidelity table.
std::vector<scenario::ContradictionCertificate> recompute_certificates(const nlohmann::json &report);

} // namespace ontic_nogo::report
