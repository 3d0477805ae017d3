#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnet/basegraph.hpp"
#include "qnet/overlay.hpp"
#include "qnet/routing.hpp"

namespace qnet {

struct DiameterOptions {
  std::size_t exact_limit = 4096;  ///< components above this are sampled
  std::size_t samples = 64;
  std::uint64_t seed = 0;
};

struct DiameterResult {
  std::int64_t diameter = 0;
  std::size_t component_size = 0;
  std::size_t node_count = 0;
  double coverage = 0.0;  ///< component_size / node_count
  bool exact = true;
  std::size_t sources = 0;  ///< BFS roots used
};

/// Diameter of the largest connected component over present links. Exact by
/// BFS from every node up to exact_limit; beyond that a seeded double-sweep
/// lower bound from `samples` roots. Throws DomainError on an empty network.
DiameterResult measured_diameter(const LinkRealization& realization, const Configuration& config,
                                 const DiameterOptions& options = {});

struct TessellationLevel {
  int level = 0;
  int square_side = 0;
  std::size_t sibling_pairs = 0;    ///< same-parent square pairs holding nodes
  std::size_t connected_pairs = 0;  ///< of those, joined by a present link
  bool event_violated = false;      ///< every sibling pair is joined
  double event_probability_bound = 0.0;
  bool bound_saturated = false;
};

struct TessellationReport {
  double gamma = 0.0;
  int levels_requested = 0;
  int levels_m = 0;
  bool clamped = false;
  double Z = 1.0;
  std::vector<TessellationLevel> levels;
  std::vector<bool> events_violated;
  bool all_events_violated = false;
  double bound_value = 0.0;  ///< 2^(m+2) * side^(gamma^m)
  std::int64_t measured_diameter = 0;
  double coverage = 0.0;
  bool bound_holds = false;
  /// Single-level check: diameter <= 2 * max level-1 square diameter + 1.
  std::int64_t max_subsquare_diameter = 0;
  bool subsquare_vacuous = false;  ///< some level-1 square is internally disconnected
  double subsquare_bound = 0.0;
  bool subsquare_bound_holds = false;
};

/// Recursive square tessellation of a 2-D lattice with per-level cross-edge
/// events. Throws DomainError unless k = 2, ConfigError unless 1/2 < gamma < 1
/// and levels_m >= 1.
TessellationReport tessellate_and_check(const LinkRealization& realization, const Configuration& config,
                                        double gamma, int levels_m, double Z = 1.0);

/// Number of tessellation levels (log log n - log log log n + log(4 gamma - k) - log K) / log(1/gamma).
double analytic_m(double n, double gamma, int k, double K);

/// K log log n / ((4 gamma - k) log n), the closed form of gamma^m.
double analytic_gamma_pow_m(double n, double gamma, int k, double K);

struct SaturatingValue {
  double value = 0.0;
  bool saturated = false;  ///< underflowed to 0 or overflowed to +inf
};

/// n^4 exp(-Z n^(gamma^(i-1)) (4 gamma - k)).
SaturatingValue event_probability_bound(double n, double gamma, int k, int level, double Z);

/// m times the level-m event bound.
SaturatingValue conjunction_probability_bound(double n, double gamma, int k, int levels_m, double Z);

enum class ScalingPlacement { Planted, Embedded };

struct ScalingOptions {
  std::vector<int> sides;
  std::size_t trials = 2000;
  GeneratorSpec generator;  ///< template; side, node count and levels are set per size
  bool auto_levels = true;  ///< r = log2(side) + 1
  ScalingPlacement placement = ScalingPlacement::Planted;
  std::uint64_t chain_steps = 0;
  RoutingMetric metric = RoutingMetric::L1;
  std::int64_t hop_limit = 0;
  std::optional<std::pair<NodeId, NodeId>> fixed_pair;
  std::uint64_t seed = 0;
};

struct ScalingRow {
  int side = 0;
  std::int64_t n = 0;
  double mean_hops = 0.0;
  double log2n_sq = 0.0;
  double ratio = 0.0;
  double delivery_rate = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;  ///< ascending n

  double max_ratio() const;
  double min_ratio() const;
};

/// Generates, places and routes one instance per side length. Sides must be
/// ascending powers of two.
ScalingReport scaling_experiment(const ScalingOptions& options);

std::string scaling_csv(const ScalingReport& report);
std::string tessellation_csv(const TessellationReport& report);

}  // namespace qnet
