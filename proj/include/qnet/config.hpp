#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qnet/analysis.hpp"
#include "qnet/basegraph.hpp"
#include "qnet/overlay.hpp"
#include "qnet/routing.hpp"

namespace qnet {

struct ChainSettings {
  std::uint64_t steps = 10'000;
  double burn_in = 0.2;
  std::uint64_t stride = 0;  ///< 0 = node count
  std::uint64_t checkpoints = 10;
};

struct RoutingSettings {
  std::size_t trials = 1000;
  std::int64_t hop_limit = 0;  ///< 0 = default_hop_limit
  RoutingMetric metric = RoutingMetric::L1;
  std::optional<std::pair<NodeId, NodeId>> fixed_pair;
};

struct AnalysisSettings {
  double gamma = 0.8;
  int levels_m = 2;
  double K = 1.0;
  double Z = 1.0;
  std::vector<int> sizes{8, 16};
  std::size_t scaling_trials = 200;
  ScalingPlacement scaling_placement = ScalingPlacement::Planted;
  std::uint64_t scaling_chain_steps = 0;
};

/// Everything one CLI invocation needs. Lattice side and dimension live in
/// `generator` and double as the base-graph shape.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  GeneratorSpec generator;
  NormalizerForm normalizer = NormalizerForm::InversePower;
  ChainSettings chain;
  RoutingSettings routing;
  AnalysisSettings analysis;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::filesystem::path> network_file;
  std::optional<std::filesystem::path> placement_file;

  BaseGraph base_graph() const { return BaseGraph(generator.dimension, generator.lattice_side); }
};

/// INI-style text: top-level `seed`, `output_dir` and sections [lattice],
/// [generator], [basegraph], [chain], [routing], [analysis], [input]. Every
/// value is range-checked; failures throw ConfigError naming the key.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace qnet
