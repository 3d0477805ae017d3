#include "qnet/routing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "qnet/errors.hpp"
#include "qnet/rng.hpp"

namespace qnet {

const char* to_string(RouteStatus status) {
  switch (status) {
    case RouteStatus::Delivered: return "delivered";
    case RouteStatus::DeadEnd: return "dead_end";
    case RouteStatus::HopLimitExceeded: return "hop_limit";
  }
  return "?";
}

std::optional<NodeId> greedy_next(NodeId /*current*/, const LatticePosition& target_pos, const NeighborReport& report,
                                  const std::vector<bool>& visited, RoutingMetric metric) {
  std::optional<NodeId> best;
  std::int64_t best_distance = std::numeric_limits<std::int64_t>::max();
  double best_fidelity = -1.0;
  for (const auto& entry : report.neighbors) {
    if (entry.node < visited.size() && visited[entry.node]) continue;
    const auto d = l1_distance(entry.position, target_pos);
    bool better = d < best_distance;
    if (!better && d == best_distance) {
      if (metric == RoutingMetric::FidelityTiebreak && entry.fidelity != best_fidelity) {
        better = entry.fidelity > best_fidelity;
      } else {
        better = entry.node < *best;
      }
    }
    if (better) {
      best = entry.node;
      best_distance = d;
      best_fidelity = entry.fidelity;
    }
  }
  return best;
}

NeighborReport present_neighbor_report(const LinkRealization& realization, const Configuration& config, NodeId node) {
  const auto& network = realization.network();
  NeighborReport report{node, {}};
  for (const auto& inc : network.incident(node)) {
    if (!realization.is_present(inc.link)) continue;
    report.neighbors.push_back({inc.neighbor, config.position(inc.neighbor), network.link(inc.link).fidelity});
  }
  return report;
}

std::int64_t default_hop_limit(const BaseGraph& graph) {
  const double lg = std::log2(static_cast<double>(graph.site_count()));
  return static_cast<std::int64_t>(std::ceil(4.0 * lg * lg)) + 16;
}

RoutingOutcome route(const LinkRealization& realization, const Configuration& config, NodeId source, NodeId target,
                     std::int64_t hop_limit, RoutingMetric metric) {
  const auto& network = realization.network();
  if (source == target) throw DomainError("route: source and target coincide");
  if (source >= network.node_count() || target >= network.node_count()) throw DomainError("route: unknown endpoint");
  if (!config.is_placed(source) || !config.is_placed(target)) {
    throw DomainError("route: endpoint " + std::to_string(config.is_placed(source) ? target : source) +
                      " has no placement");
  }
  const auto& target_pos = config.position(target);

  RoutingOutcome outcome;
  std::vector<bool> visited(network.node_count(), false);
  NodeId current = source;
  visited[current] = true;
  outcome.path.push_back(current);
  while (true) {
    if (current == target) {
      outcome.status = RouteStatus::Delivered;
      break;
    }
    if (outcome.hops >= hop_limit) {
      outcome.status = RouteStatus::HopLimitExceeded;
      break;
    }
    const auto next = greedy_next(current, target_pos, present_neighbor_report(realization, config, current), visited,
                                  metric);
    if (!next) {
      outcome.status = RouteStatus::DeadEnd;
      break;
    }
    current = *next;
    visited[current] = true;
    outcome.path.push_back(current);
    ++outcome.hops;
  }
  return outcome;
}

EnsembleSummary route_ensemble(const OverlayNetwork& network, const Configuration& config,
                               const EnsembleOptions& options) {
  if (options.trials < 1) throw DomainError("route_ensemble: trials must be >= 1");
  const std::size_t n = network.node_count();
  if (n < 2) throw DomainError("route_ensemble: need at least two nodes");
  if (options.fixed_pair) {
    const auto [s, t] = *options.fixed_pair;
    if (s == t || s >= n || t >= n) throw DomainError("route_ensemble: invalid fixed pair");
  }
  const std::int64_t hop_limit = options.hop_limit > 0 ? options.hop_limit : default_hop_limit(config.graph());

  Rng pairs(derive_seed(options.seed, "route.pairs"));
  const std::uint64_t realization_base = derive_seed(options.seed, "route.realization");

  EnsembleSummary summary;
  summary.trials = options.trials;
  std::vector<std::int64_t> hops;
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    NodeId source, target;
    if (options.fixed_pair) {
      std::tie(source, target) = *options.fixed_pair;
    } else {
      source = static_cast<NodeId>(pairs.below(n));
      target = static_cast<NodeId>(pairs.below(n - 1));
      if (target >= source) ++target;
    }
    const auto realization = realize_links(network, mix64(realization_base + trial));
    const auto outcome = route(realization, config, source, target, hop_limit, options.metric);
    switch (outcome.status) {
      case RouteStatus::Delivered:
        ++summary.delivered;
        hops.push_back(outcome.hops);
        ++summary.hop_histogram[outcome.hops];
        break;
      case RouteStatus::DeadEnd: ++summary.dead_ends; break;
      case RouteStatus::HopLimitExceeded: ++summary.hop_limit_hits; break;
    }
  }

  summary.delivery_rate = static_cast<double>(summary.delivered) / static_cast<double>(summary.trials);
  if (hops.empty()) {
    summary.mean_hops = summary.median_hops = summary.p95_hops = std::numeric_limits<double>::quiet_NaN();
    return summary;
  }
  std::sort(hops.begin(), hops.end());
  double total = 0.0;
  for (auto h : hops) total += static_cast<double>(h);
  const std::size_t count = hops.size();
  summary.mean_hops = total / static_cast<double>(count);
  summary.median_hops = count % 2 ? static_cast<double>(hops[count / 2])
                                  : 0.5 * static_cast<double>(hops[count / 2 - 1] + hops[count / 2]);
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(count)));
  summary.p95_hops = static_cast<double>(hops[std::max<std::size_t>(rank, 1) - 1]);
  return summary;
}

std::string ensemble_csv_header() { return "side,n,k,trials,seed,mean_hops,median_hops,p95_hops,delivery_rate\n"; }

std::string ensemble_csv_row(const BaseGraph& graph, const EnsembleOptions& options, const EnsembleSummary& summary) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%lld,%d,%zu,%llu,%.6f,%.6f,%.6f,%.6f\n", graph.side(),
                static_cast<long long>(graph.site_count()), graph.dimension(), summary.trials,
                static_cast<unsigned long long>(options.seed), summary.mean_hops, summary.median_hops,
                summary.p95_hops, summary.delivery_rate);
  return buf;
}

}  // namespace qnet
