#pragma once

#include <filesystem>
#include <iosfwd>

#include "qnet/config.hpp"

namespace qnet {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitParse = 3,
  kExitGuard = 4,
};

/// Writes network.txt and planted.txt (the generator's own layout).
void cmd_generate(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

/// Runs the swap chain from a seeded random start; writes placement.txt and
/// chain.csv (`step,loglik,acceptance_rate`).
void cmd_embed(const ExperimentConfig& config, const std::filesystem::path& network_file,
               const std::filesystem::path& out_dir, std::ostream& log);

/// Runs a routing ensemble; writes routes.csv.
void cmd_route(const ExperimentConfig& config, const std::filesystem::path& network_file,
               const std::filesystem::path& placement_file, const std::filesystem::path& out_dir, std::ostream& log);

/// Diameter, tessellation and scaling reports: tessellation.csv, scaling.csv
/// and summary.json.
void cmd_analyze(const ExperimentConfig& config, const std::filesystem::path& network_file,
                 const std::filesystem::path& placement_file, const std::filesystem::path& out_dir, std::ostream& log);

/// Full command-line entry point: `<generate|embed|route|analyze> --config <path>
/// [--seed <u64>] [--out <dir>] [--network <file>] [--placement <file>]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qnet
