#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "waveguide/config.hpp"

namespace wg {

/// Exit statuses of the command-line tool.
namespace status {
inline constexpr int ok = 0;
inline constexpr int config_error = 2;
inline constexpr int solver_error = 3;
inline constexpr int empty_band = 4;
}  // namespace status

/// Sweep band left empty after threshold skipping.
class EmptyBandError : public Error {
 public:
  using Error::Error;
};

/// Frequencies of the sweep that survive threshold skipping; `skipped`
/// receives (k, threshold) for every dropped point.
std::vector<double> retained_frequencies(const RunConfig& c, std::vector<std::pair<double, double>>& skipped);

/// Output documents of each subcommand. `out_path` is used by scatter only
/// (directory for per-k exports); the returned text is the primary output.
std::string cmd_modes(const RunConfig& c);
std::string cmd_thresholds(const RunConfig& c);
std::string cmd_ledger(const RunConfig& c);
std::string cmd_scatter(const RunConfig& c, const std::string& out_dir, std::ostream& log, bool verbose);
std::string cmd_radiate(const RunConfig& c);

/// Entry point: `<tool> <modes|thresholds|ledger|scatter|radiate> --config <path> [--out <path>] [--verbose]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wg
