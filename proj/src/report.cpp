#include "ontic_nogo/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace ontic_nogo::report {

using nlohmann::json;
namespace sc = ontic_nogo::scenario;

namespace {

void write_canonical(const json &j, std::string &out) {
  switch (j.type()) {
  case json::value_t::null:
    out += "null";
    break;
  case json::value_t::boolean:
    out += j.get<bool>() ? "true" : "false";
    break;
  case json::value_t::number_integer:
    out += std::to_string(j.get<std::int64_t>());
    break;
  case json::value_t::number_unsigned:
    out += std::to_string(j.get<std::uint64_t>());
    break;
  case json::value_t::number_float: {
    // -0 would reparse as the integer 0.
    const double v = j.get<double>() == 0.0 ? 0.0 : j.get<double>();
    if (!std::isfinite(v)) {
      out += "null";
      break;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
    break;
  }
  case json::value_t::string:
    out += j.dump();
    break;
  case json::value_t::array: {
    out += '[';
    bool first = true;
    for (const auto &v : j) {
      if (!first) {
        out += ',';
      }
      first = false;
      write_canonical(v, out);
    }
    out += ']';
    break;
  }
  case json::value_t::object: {
    // nlohmann::json objects are std::map-backed, so iteration is key-sorted.
    out += '{';
    bool first = true;
    for (const auto &[key, v] : j.items()) {
      if (!first) {
        out += ',';
      }
      first = false;
      out += json(key).dump();
      out += ':';
      write_canonical(v, out);
    }
    out += '}';
    break;
  }
  case json::value_t::binary:
  case json::value_t::discarded:
    throw std::invalid_argument("value has no canonical JSON form");
  }
}

sc::Provenance provenance_from(const std::string &s) {
  if (s == "actual") {
    return sc::Provenance::actual;
  }
  if (s == "counterfactual") {
    return sc::Provenance::counterfactual;
  }
  throw std::invalid_argument("unknown provenance '" + s + "'");
}

} // namespace

std::string canonical_dump(const json &j) {
  std::string out;
  write_canonical(j, out);
  out += '\n';
  return out;
}

std::string run_id(const json &config, std::uint64_t seed) {
  std::string text = canonical_dump(config) + std::to_string(seed);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const sc::TrialRecord &r) {
  return json{{"trial", r.trial_index},
              {"fprime", sc::to_string(r.fprime_outcome)},
              {"f_basis", sc::to_string(r.f_basis)},
              {"f_outcome", sc::to_string(r.f_outcome)},
              {"routed_to", sc::to_string(r.routed_to)},
              {"assigned_state", r.assigned_state}};
}

json to_json(const sc::EmncLedger &ledger) {
  json entries = json::array();
  for (const auto &e : ledger.entries()) {
    json claims = json::array();
    for (const auto &c : e.claims) {
      claims.push_back({{"state", c.state}, {"provenance", sc::to_string(c.provenance)}, {"epoch", c.epoch}});
    }
    entries.push_back({{"trial", e.trial_index}, {"token", e.token.str()}, {"token_id", e.token.id}, {"claims", claims}});
  }
  return json{{"no_superdeterminism", ledger.no_superdeterminism()},
              {"entries", entries},
              {"summary",
               {{"entry_count", ledger.entries().size()}, {"multi_membership_count", ledger.multi_membership_count()}}}};
}

json to_json(const sc::ContradictionCertificate &c) {
  return json{{"trial", c.trial_index}, {"token", c.token.str()}, {"token_id", c.token.id}, {"state_a", c.state_a},
              {"state_b", c.state_b},   {"fidelity", c.fidelity},   {"verdict", c.verdict}};
}

json to_json(const optimize::OverlapReport &o) {
  return json{{"fidelity", o.fidelity},
              {"omega_q", o.omega_q},
              {"omega_c_max", o.omega_c_max ? json(*o.omega_c_max) : json(nullptr)},
              {"omega_c_source", o.omega_c_source},
              {"bclm_bound", o.bclm_bound},
              {"dimension", o.dimension},
              {"pbr_disjoint_required", o.pbr_disjoint_required},
              {"forced_overlap_claim", o.forced_overlap_claim},
              {"contradiction", o.contradiction}};
}

json to_json(const sc::FidelityTable &t) {
  json out = json::array();
  for (const auto &[pair, f] : t.pairs()) {
    out.push_back({{"a", pair.first}, {"b", pair.second}, {"fidelity", f}});
  }
  return out;
}

json to_json(const RunReport &r) {
  json trials = json::array();
  for (const auto &t : r.trials) {
    trials.push_back(to_json(t));
  }
  json certificates = json::array();
  for (const auto &c : r.certificates) {
    certificates.push_back(to_json(c));
  }
  json out{{"schema_version", kSchemaVersion},
           {"run_id", run_id(r.config, r.seed)},
           {"scenario", r.scenario},
           {"config", r.config},
           {"seed", r.seed},
           {"trials", trials},
           {"ledger", r.ledger ? to_json(*r.ledger) : json(nullptr)},
           {"fidelities", to_json(r.fidelities)},
           {"certificates", certificates},
           {"overlap", r.overlap ? to_json(*r.overlap) : json(nullptr)},
           {"results", r.results},
           {"warnings", r.warnings}};
  if (r.timing_seconds) {
    out["timing_seconds"] = *r.timing_seconds;
  }
  return out;
}

sc::EmncLedger ledger_from_json(const json &j) {
  sc::EmncLedger ledger(j.at("no_superdeterminism").get<bool>());
  for (const auto &e : j.at("entries")) {
    const sc::OnticToken token{e.at("token_id").get<std::uint64_t>()};
    ledger.open(e.at("trial").get<std::size_t>(), token);
    for (const auto &c : e.at("claims")) {
      ledger.claim(token, {c.at("state").get<std::string>(), provenance_from(c.at("provenance").get<std::string>()),
                           c.at("epoch").get<std::string>()});
    }
  }
  return ledger;
}

sc::FidelityTable fidelities_from_json(const json &j) {
  sc::FidelityTable t;
  for (const auto &p : j) {
    t.set(p.at("a").get<std::string>(), p.at("b").get<std::string>(), p.at("fidelity").get<double>());
  }
  return t;
}

std::vector<sc::ContradictionCertificate> certificates_from_json(const json &j) {
  std::vector<sc::ContradictionCertificate> out;
  for (const auto &c : j) {
    out.push_back(sc::ContradictionCertificate{c.at("trial").get<std::size_t>(),
                                               sc::OnticToken{c.at("token_id").get<std::uint64_t>()},
                                               c.at("state_a").get<std::string>(), c.at("state_b").get<std::string>(),
                                               c.at("fidelity").get<double>(), c.at("verdict").get<std::string>()});
  }
  return out;
}

std::string emit_json(const RunReport &r) { return canonical_dump(to_json(r)); }

std::string emit_trials_csv(std::span<const sc::TrialRecord> records) {
  std::ostringstream os;
  os << "trial,fprime,f_basis,f_outcome,routed_to,assigned_state\n";
  for (const auto &r : records) {
    os << r.trial_index << ',' << sc::to_string(r.fprime_outcome) << ',' << sc::to_string(r.f_basis) << ','
       << sc::to_string(r.f_outcome) << ',' << sc::to_string(r.routed_to) << ',' << r.assigned_state << '\n';
  }
  return os.str();
}

std::vector<sc::ContradictionCertificate> recompute_certificates(const json &report) {
  if (report.at("ledger").is_null()) {
    return {};
  }
  return sc::derive_certificates(ledger_from_json(report.at("ledger")), fidelities_from_json(report.at("fidelities")));
}

} // namespace ontic_nogo::report
