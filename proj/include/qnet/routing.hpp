#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qnet/basegraph.hpp"
#include "qnet/embedding.hpp"
#include "qnet/overlay.hpp"

namespace qnet {

enum class RoutingMetric {
  L1,                ///< nearest to the target, ties to the smallest id
  FidelityTiebreak,  ///< nearest to the target, ties to the highest link fidelity
};

enum class RouteStatus { Delivered, DeadEnd, HopLimitExceeded };

const char* to_string(RouteStatus status);

struct RoutingOutcome {
  std::vector<NodeId> path;
  std::int64_t hops = 0;
  RouteStatus status = RouteStatus::DeadEnd;
};

/// Picks the unvisited contact closest (L1) to `target_pos`. nullopt when every
/// contact has been visited.
std::optional<NodeId> greedy_next(NodeId current, const LatticePosition& target_pos, const NeighborReport& report,
                                  const std::vector<bool>& visited, RoutingMetric metric = RoutingMetric::L1);

/// Contacts of `node` over links present in the realization.
NeighborReport present_neighbor_report(const LinkRealization& realization, const Configuration& config,
                                       NodeId node);

/// 4 (log2 n)^2 + 16 for an n-site lattice.
std::int64_t default_hop_limit(const BaseGraph& graph);

/// Greedy forwarding from source to target over present links using only the
/// current node's contacts and the target's site. Throws DomainError for
/// unplaced endpoints or source == target.
RoutingOutcome route(const LinkRealization& realization, const Configuration& config, NodeId source, NodeId target,
                     std::int64_t hop_limit, RoutingMetric metric = RoutingMetric::L1);

struct EnsembleOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::int64_t hop_limit = 0;  ///< 0 selects default_hop_limit
  RoutingMetric metric = RoutingMetric::L1;
  std::optional<std::pair<NodeId, NodeId>> fixed_pair;
};

struct EnsembleSummary {
  std::size_t trials = 0;
  std::size_t delivered = 0;
  std::size_t dead_ends = 0;
  std::size_t hop_limit_hits = 0;
  double mean_hops = 0.0;  ///< over delivered routes; NaN if none
  double median_hops = 0.0;
  double p95_hops = 0.0;
  double delivery_rate = 0.0;
  std::map<std::int64_t, std::size_t> hop_histogram;  ///< delivered routes only
};

/// Fresh realization and a uniform ordered source/target pair per trial.
EnsembleSummary route_ensemble(const OverlayNetwork& network, const Configuration& config,
                               const EnsembleOptions& options);

std::string ensemble_csv_header();
std::string ensemble_csv_row(const BaseGraph& graph, const EnsembleOptions& options, const EnsembleSummary& summary);

}  // namespace qnet
