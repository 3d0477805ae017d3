#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qnet/basegraph.hpp"
#include "qnet/overlay.hpp"
#include "qnet/rng.hpp"

namespace qnet {

struct NeighborEntry {
  NodeId node;
  LatticePosition position;
  double fidelity = 1.0;
};

/// What a node learns about its direct contacts: their ids and sites. This is
/// the only non-local information the swap decision may consult.
struct NeighborReport {
  NodeId owner;
  std::vector<NeighborEntry> neighbors;
};

NeighborReport collect_neighbor_positions(const OverlayNetwork& network, const Configuration& config, NodeId node);

/// Pre-swap product: prod_u d(pos_x, u)^k * prod_v d(pos_y, v)^k.
double zeta_quantity(const LatticePosition& pos_x, const LatticePosition& pos_y, const NeighborReport& report_x,
                     const NeighborReport& report_y);

/// Post-swap product with the two sites exchanged. A link between x and y
/// keeps its length under the swap and contributes d(pos_x, pos_y)^k.
double phi_quantity(const LatticePosition& pos_x, const LatticePosition& pos_y, const NeighborReport& report_x,
                    const NeighborReport& report_y);

/// Natural-log forms of the two products; immune to overflow on hub nodes.
double log_zeta_quantity(const LatticePosition& pos_x, const LatticePosition& pos_y,
                         const NeighborReport& report_x, const NeighborReport& report_y);
double log_phi_quantity(const LatticePosition& pos_x, const LatticePosition& pos_y,
                        const NeighborReport& report_x, const NeighborReport& report_y);

/// min(1, zeta / phi_q); 1 when both are zero.
double swap_probability(double zeta, double phi_q);

struct SwapDecision {
  NodeId node_x;
  NodeId node_y;
  double zeta;
  double phi_q;
  double swap_probability;
  bool accepted;
};

/// nullopt records a self-loop (no-op) step.
using StepRecord = std::optional<SwapDecision>;

/// The position-swap Markov chain over configurations of one network.
class SwapChain {
 public:
  /// Throws DomainError if the configuration does not place every node.
  SwapChain(const OverlayNetwork& network, Configuration initial, std::uint64_t seed);

  const Configuration& config() const { return config_; }
  const OverlayNetwork& network() const { return *network_; }
  std::uint64_t step_count() const { return step_count_; }
  std::uint64_t proposed_swaps() const { return proposed_swaps_; }
  std::uint64_t accepted_swaps() const { return accepted_swaps_; }
  std::uint64_t seed() const { return seed_; }

  /// Self-loop with probability n/(n + C(n,2)), otherwise a uniform pair of
  /// distinct nodes. Throws DomainError for fewer than two nodes.
  std::optional<std::pair<NodeId, NodeId>> propose_pair();

  StepRecord step();
  const Configuration& run(std::uint64_t steps);

 private:
  const OverlayNetwork* network_;
  Configuration config_;
  Rng rng_;
  std::uint64_t seed_;
  std::uint64_t step_count_ = 0;
  std::uint64_t proposed_swaps_ = 0;
  std::uint64_t accepted_swaps_ = 0;
};

/// The first `count` sites in row-major order; the site set the CLI embeds onto.
std::vector<LatticePosition> default_occupied_sites(const BaseGraph& graph, std::size_t count);

/// Nodes assigned to the occupied sites by a seeded uniform permutation.
Configuration random_configuration(const BaseGraph& graph, const std::vector<LatticePosition>& occupied,
                                   std::uint64_t seed);

struct PosteriorEntry {
  std::vector<std::size_t> assignment;  ///< node -> index into `occupied`
  Configuration config;
  double probability;
};

inline constexpr std::size_t kPosteriorStateLimit = 1'000'000;
inline constexpr std::size_t kTransitionStateLimit = 5040;

/// Exact posterior over all bijections onto `occupied` under a uniform prior
/// and the kernel likelihood prod d^-k, in lexicographic assignment order.
/// Throws SizeError past kPosteriorStateLimit states.
std::vector<PosteriorEntry> exact_posterior(const OverlayNetwork& network, const BaseGraph& graph,
                                            const std::vector<LatticePosition>& occupied);

struct StationarityReport {
  std::size_t states = 0;
  double stationarity_residual = 0.0;    ///< max |pi T - pi|
  double detailed_balance_residual = 0.0;  ///< max |pi_a T_ab - pi_b T_ba|
  double row_sum_residual = 0.0;
};

/// Builds the explicit transition matrix from the chain's proposal and
/// acceptance rules and compares it to exact_posterior. Throws SizeError past
/// kTransitionStateLimit states.
StationarityReport stationarity_report(const OverlayNetwork& network, const BaseGraph& graph,
                                       const std::vector<LatticePosition>& occupied);

inline double stationarity_check(const OverlayNetwork& network, const BaseGraph& graph,
                                 const std::vector<LatticePosition>& occupied) {
  return stationarity_report(network, graph, occupied).stationarity_residual;
}

struct SamplingPlan {
  std::uint64_t steps = 100'000;
  double burn_in_fraction = 0.2;
  std::uint64_t stride = 0;  ///< 0 samples every n-th step
};

/// Visit frequencies of the chain's states, aligned with exact_posterior's order.
std::vector<double> empirical_distribution(SwapChain& chain, const std::vector<LatticePosition>& occupied,
                                           const SamplingPlan& plan);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace qnet
