#pragma once

#include <iosfwd>

namespace ontic_nogo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitContradiction = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Parses arguments, runs one scenario and writes the report. The report goes
/// to `out` unless `--out` names a file; diagnostics go to `err`.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace ontic_nogo::cli
