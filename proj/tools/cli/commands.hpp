#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace blayer::cli {

inline constexpr int kExitExists = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotExists = 2;

/// Verdict JSON on `out`; 0 exists, 2 does not.
int cmd_classify(const RunConfig& cfg, std::ostream& out);
/// One file per curve in cfg.out; 2 when supersonic.
int cmd_trace(const RunConfig& cfg, std::ostream& out);
/// profile.csv (or .json) in cfg.out and the verdict with decay fit on `out`.
int cmd_profile(const RunConfig& cfg, std::ostream& out);
/// portrait.svg in cfg.out; 2 when supersonic.
int cmd_portrait(const RunConfig& cfg, std::ostream& out);
/// sweep.csv (or .json) in cfg.out over a Mach grid of cfg.points values.
int cmd_sweep(const RunConfig& cfg, std::ostream& out);

/// Sweep rows before formatting, in grid order.
struct SweepRow {
  double mach_plus;
  RegimeKind regime;
  double det_A, tr_A, lambda1, lambda2, alpha1, alpha2;
  std::string gamma2_terminal;  ///< "NA" unless subsonic
};
std::vector<SweepRow> run_sweep(const RunConfig& cfg);

/// Full command line: parses flags and the config file, runs the
/// subcommand, maps errors to exit code 1 with a diagnostic on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace blayer::cli
