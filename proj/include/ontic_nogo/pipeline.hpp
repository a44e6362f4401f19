#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ontic_nogo/hilbert.hpp"
#include "ontic_nogo/ontic.hpp"
#include "ontic_nogo/report.hpp"

namespace ontic_nogo::cli {

enum class ScenarioKind { em_basic, argument_one, argument_two, overlap_lp, bclm };

const char *to_string(ScenarioKind kind);

struct RunConfig {
  ScenarioKind kind = ScenarioKind::em_basic;

  // argument-one
  std::optional<hilbert::Direction> n1;
  std::optional<hilbert::Direction> n2;
  std::size_t trials = 1000;
  bool no_superdeterminism = false;

  // argument-two
  double t0 = 1.0;
  /// "random", "up" or "down".
  std::string branch = "random";

  // em-basic
  std::size_t repeats = 3;

  // overlap-lp: spin-up states along `states`, spin measurements along
  // `measurements`; `pbr` lifts to two copies and adds the PBR measurement.
  std::vector<hilbert::Direction> states{hilbert::Direction::z(), hilbert::Direction::x()};
  std::vector<hilbert::Direction> measurements{hilbert::Direction::z(), hilbert::Direction::x()};
  bool pbr = false;

  // bclm
  std::optional<double> inner;
  std::optional<std::size_t> dim;

  std::optional<std::uint64_t> seed;
  std::size_t lp_cap = ontic::kDefaultEnumerationCap;
  double lp_tolerance = 1e-9;
  double support_epsilon = ontic::kSupportEpsilon;
  std::size_t threads = 1;

  std::string out_path;
  std::string csv_path;
  bool fail_on_contradiction = false;
  bool emit_timing = false;

  /// Throws UsageError for missing or out-of-range values.
  void validate() const;
};

class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The fields that determine a report's content, for echoing and hashing.
/// Output sinks, thread count and exit policy are excluded.
nlohmann::json config_echo(const RunConfig &config);

/// Runs the configured scenario with `seed`.
report::RunReport run_pipeline(const RunConfig &config, std::uint64_t seed);

/// True if the report carries a contradiction certificate or a contradiction
/// verdict in its overlap section.
bool has_contradiction(const report::RunReport &r);

/// "polar,azimuth" in radians.
hilbert::Direction parse_direction(const std::string &text);
/// "p,a;p,a;..."
std::vector<hilbert::Direction> parse_directions(const std::string &text);

} // namespace ontic_nogo::cli
