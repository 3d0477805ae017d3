#include "qnet/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "qnet/errors.hpp"

namespace qnet {

NeighborReport collect_neighbor_positions(const OverlayNetwork& network, const Configuration& config, NodeId node) {
  NeighborReport report{node, {}};
  for (const auto& inc : network.incident(node)) {
    report.neighbors.push_back({inc.neighbor, config.position(inc.neighbor), network.link(inc.link).fidelity});
  }
  return report;
}

namespace {

// Site a neighbour of `self` occupies after self and `partner` exchange
// sites: only the partner itself moves.
const LatticePosition& post_swap_site(const NeighborEntry& entry, NodeId partner, const LatticePosition& self_site) {
  return entry.node == partner ? self_site : entry.position;
}

// Distance factors are floored at 1, the smallest separation of distinct sites.
std::int64_t floored(std::int64_t d) { return std::max<std::int64_t>(d, 1); }

template <typename Accumulate>
void for_each_pre_swap_distance(const LatticePosition& pos_x, const LatticePosition& pos_y,
                                const NeighborReport& report_x, const NeighborReport& report_y, Accumulate&& acc) {
  for (const auto& u : report_x.neighbors) acc(floored(l1_distance(pos_x, u.position)));
  for (const auto& v : report_y.neighbors) acc(floored(l1_distance(pos_y, v.position)));
}

template <typename Accumulate>
void for_each_post_swap_distance(const LatticePosition& pos_x, const LatticePosition& pos_y,
                                 const NeighborReport& report_x, const NeighborReport& report_y, Accumulate&& acc) {
  for (const auto& u : report_x.neighbors) {
    acc(floored(l1_distance(pos_y, post_swap_site(u, report_y.owner, pos_x))));
  }
  for (const auto& v : report_y.neighbors) {
    acc(floored(l1_distance(pos_x, post_swap_site(v, report_x.owner, pos_y))));
  }
}

}  // namespace

double zeta_quantity(const LatticePosition& pos_x, const LatticePosition& pos_y, const NeighborReport& report_x,
                     const NeighborReport& report_y) {
  const int k = static_cast<int>(pos_x.dimension());
  double product = 1.0;
  for_each_pre_swap_distance(pos_x, pos_y, report_x, report_y,
                             [&](std::int64_t d) { product *= std::pow(static_cast<double>(d), k); });
  return product;
}

double phi_quantity(const LatticePosition& pos_x, const LatticePosition& pos_y, const NeighborReport& report_x,
                    const NeighborReport& report_y) {
  const int k = static_cast<int>(pos_x.dimension());
  double product = 1.0;
  for_each_post_swap_distance(pos_x, pos_y, report_x, report_y,
                              [&](std::int64_t d) { product *= std::pow(static_cast<double>(d), k); });
  return product;
}

double log_zeta_quantity(const LatticePosition& pos_x, const LatticePosition& pos_y,
                         const NeighborReport& report_x, const NeighborReport& report_y) {
  const double k = static_cast<double>(pos_x.dimension());
  double sum = 0.0;
  for_each_pre_swap_distance(pos_x, pos_y, report_x, report_y,
                             [&](std::int64_t d) { sum += k * std::log(static_cast<double>(d)); });
  return sum;
}

double log_phi_quantity(const LatticePosition& pos_x, const LatticePosition& pos_y,
                        const NeighborReport& report_x, const NeighborReport& report_y) {
  const double k = static_cast<double>(pos_x.dimension());
  double sum = 0.0;
  for_each_post_swap_distance(pos_x, pos_y, report_x, report_y,
                              [&](std::int64_t d) { sum += k * std::log(static_cast<double>(d)); });
  return sum;
}

double swap_probability(double zeta, double phi_q) {
  if (zeta >= phi_q) return 1.0;
  return zeta / phi_q;
}

// ---------------------------------------------------------------------------

SwapChain::SwapChain(const OverlayNetwork& network, Configuration initial, std::uint64_t seed)
    : network_(&network), config_(std::move(initial)), rng_(seed), seed_(seed) {
  if (config_.node_count() != network.node_count()) {
    throw DomainError("swap chain: configuration places " + std::to_string(config_.node_count()) + " nodes, network has " +
                      std::to_string(network.node_count()));
  }
}

std::optional<std::pair<NodeId, NodeId>> SwapChain::propose_pair() {
  const std::uint64_t n = config_.node_count();
  if (n < 2) throw DomainError("propose_pair: need at least two placed nodes");
  const std::uint64_t pairs = n * (n - 1) / 2;
  std::uint64_t draw = rng_.below(n + pairs);
  if (draw < n) return std::nullopt;
  draw -= n;
  // Unrank `draw` into the pair (i, j), i < j, in lexicographic order.
  NodeId i = 0;
  std::uint64_t row = n - 1;
  while (draw >= row) {
    draw -= row;
    --row;
    ++i;
  }
  return std::make_pair(i, static_cast<NodeId>(i + 1 + draw));
}

StepRecord SwapChain::step() {
  ++step_count_;
  const auto pair = propose_pair();
  if (!pair) return std::nullopt;
  ++proposed_swaps_;

  const auto [x, y] = *pair;
  const auto report_x = collect_neighbor_positions(*network_, config_, x);
  const auto report_y = collect_neighbor_positions(*network_, config_, y);
  const auto& pos_x = config_.position(x);
  const auto& pos_y = config_.position(y);

  SwapDecision decision{x, y, zeta_quantity(pos_x, pos_y, report_x, report_y),
                        phi_quantity(pos_x, pos_y, report_x, report_y), 1.0, true};
  const double log_ratio =
      log_zeta_quantity(pos_x, pos_y, report_x, report_y) - log_phi_quantity(pos_x, pos_y, report_x, report_y);
  if (log_ratio < 0.0) {
    decision.swap_probability = std::exp(log_ratio);
    decision.accepted = rng_.uniform() < decision.swap_probability;
  }
  if (decision.accepted) {
    config_.swap_positions(x, y);
    ++accepted_swaps_;
  }
  return decision;
}

const Configuration& SwapChain::run(std::uint64_t steps) {
  for (std::uint64_t i = 0; i < steps; ++i) step();
  return config_;
}

// ---------------------------------------------------------------------------

std::vector<LatticePosition> default_occupied_sites(const BaseGraph& graph, std::size_t count) {
  if (static_cast<std::int64_t>(count) > graph.site_count()) {
    throw DomainError("cannot occupy " + std::to_string(count) + " sites of a " + std::to_string(graph.site_count()) +
                      "-site lattice");
  }
  std::vector<LatticePosition> sites;
  sites.reserve(count);
  for (std::size_t i = 0; i < count; ++i) sites.push_back(graph.site(static_cast<std::int64_t>(i)));
  return sites;
}

Configuration random_configuration(const BaseGraph& graph, const std::vector<LatticePosition>& occupied,
                                   std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LatticePosition> positions = occupied;
  for (std::size_t i = positions.size(); i > 1; --i) std::swap(positions[i - 1], positions[rng.below(i)]);
  return Configuration(graph, std::move(positions));
}

namespace {

std::size_t factorial_capped(std::size_t n, std::size_t cap) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) {
    f *= i;
    if (f > cap) return cap + 1;
  }
  return f;
}

// Lexicographic rank of a permutation of 0..n-1.
std::size_t permutation_rank(const std::vector<std::size_t>& perm) {
  const std::size_t n = perm.size();
  std::size_t rank = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t smaller_after = 0;
    for (std::size_t j = i + 1; j < n; ++j) smaller_after += perm[j] < perm[i];
    rank = rank * (n - i) + smaller_after;
  }
  return rank;
}

std::vector<std::size_t> assignment_of(const Configuration& config, const std::vector<LatticePosition>& occupied) {
  std::map<LatticePosition, std::size_t> index;
  for (std::size_t i = 0; i < occupied.size(); ++i) index.emplace(occupied[i], i);
  std::vector<std::size_t> assignment;
  assignment.reserve(config.node_count());
  for (const auto& pos : config.positions()) {
    auto it = index.find(pos);
    if (it == index.end()) throw DomainError("configuration leaves the occupied site set at " + to_string(pos));
    assignment.push_back(it->second);
  }
  return assignment;
}

void check_occupied(const OverlayNetwork& network, const BaseGraph& graph, const std::vector<LatticePosition>& occupied) {
  if (occupied.size() != network.node_count()) {
    throw DomainError("need exactly one occupied site per node (" + std::to_string(network.node_count()) + "), got " +
                      std::to_string(occupied.size()));
  }
  Configuration(graph, occupied);  // validates injectivity and bounds
}

}  // namespace

std::vector<PosteriorEntry> exact_posterior(const OverlayNetwork& network, const BaseGraph& graph,
                                            const std::vector<LatticePosition>& occupied) {
  check_occupied(network, graph, occupied);
  const std::size_t n = occupied.size();
  if (factorial_capped(n, kPosteriorStateLimit) > kPosteriorStateLimit) {
    throw SizeError("exact_posterior: " + std::to_string(n) + "! states exceed the enumeration limit");
  }
  const double k = graph.dimension();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  std::vector<PosteriorEntry> entries;
  std::vector<double> log_weights;
  do {
    // Uniform prior: log posterior = kernel log likelihood + const.
    double log_w = 0.0;
    for (const auto& e : network.links()) {
      const auto d = l1_distance(occupied[perm[e.endpoint_a]], occupied[perm[e.endpoint_b]]);
      log_w -= k * std::log(static_cast<double>(d));
    }
    std::vector<LatticePosition> positions;
    positions.reserve(n);
    for (auto idx : perm) positions.push_back(occupied[idx]);
    entries.push_back({perm, Configuration(graph, std::move(positions)), 0.0});
    log_weights.push_back(log_w);
  } while (std::next_permutation(perm.begin(), perm.end()));

  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - top);
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].probability = std::exp(log_weights[i] - top) / total;
  return entries;
}

StationarityReport stationarity_report(const OverlayNetwork& network, const BaseGraph& graph,
                                       const std::vector<LatticePosition>& occupied) {
  check_occupied(network, graph, occupied);
  const std::size_t n = occupied.size();
  if (factorial_capped(n, kTransitionStateLimit) > kTransitionStateLimit) {
    throw SizeError("stationarity_check: " + std::to_string(n) + "! states exceed the transition-matrix limit");
  }
  const auto posterior = exact_posterior(network, graph, occupied);
  const std::size_t states = posterior.size();
  const double omega = 1.0 / static_cast<double>(n + n * (n - 1) / 2);

  std::vector<std::vector<double>> T(states, std::vector<double>(states, 0.0));
  for (std::size_t s = 0; s < states; ++s) {
    const auto& config = posterior[s].config;
    double leave = 0.0;
    for (NodeId x = 0; x < n; ++x) {
      for (NodeId y = x + 1; y < n; ++y) {
        const auto rx = collect_neighbor_positions(network, config, x);
        const auto ry = collect_neighbor_positions(network, config, y);
        const auto& px = config.position(x);
        const auto& py = config.position(y);
        const double log_ratio = log_zeta_quantity(px, py, rx, ry) - log_phi_quantity(px, py, rx, ry);
        const double accept = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
        auto next = posterior[s].assignment;
        std::swap(next[x], next[y]);
        const double p = omega * accept;
        T[s][permutation_rank(next)] += p;
        leave += p;
      }
    }
    T[s][s] += 1.0 - leave;
  }

  StationarityReport report;
  report.states = states;
  for (std::size_t j = 0; j < states; ++j) {
    double flow = 0.0, row = 0.0;
    for (std::size_t i = 0; i < states; ++i) {
      flow += posterior[i].probability * T[i][j];
      row += T[j][i];
    }
    report.stationarity_residual = std::max(report.stationarity_residual, std::abs(flow - posterior[j].probability));
    report.row_sum_residual = std::max(report.row_sum_residual, std::abs(row - 1.0));
  }
  for (std::size_t a = 0; a < states; ++a) {
    for (std::size_t b = a + 1; b < states; ++b) {
      if (T[a][b] == 0.0 && T[b][a] == 0.0) continue;
      const double gap = std::abs(posterior[a].probability * T[a][b] - posterior[b].probability * T[b][a]);
      report.detailed_balance_residual = std::max(report.detailed_balance_residual, gap);
    }
  }
  return report;
}

std::vector<double> empirical_distribution(SwapChain& chain, const std::vector<LatticePosition>& occupied,
                                           const SamplingPlan& plan) {
  const std::size_t n = occupied.size();
  if (chain.config().node_count() != n) throw DomainError("empirical_distribution: occupied set does not match chain");
  const std::size_t states = factorial_capped(n, kPosteriorStateLimit);
  if (states > kPosteriorStateLimit) throw SizeError("empirical_distribution: state space too large");
  if (!(plan.burn_in_fraction >= 0.0 && plan.burn_in_fraction < 1.0)) {
    throw DomainError("burn-in fraction must lie in [0, 1)");
  }
  const std::uint64_t stride = plan.stride ? plan.stride : n;
  const auto burn_in = static_cast<std::uint64_t>(std::floor(plan.burn_in_fraction * static_cast<double>(plan.steps)));

  std::vector<double> counts(states, 0.0);
  std::size_t samples = 0;
  for (std::uint64_t t = 1; t <= plan.steps; ++t) {
    chain.step();
    if (t > burn_in && (t - burn_in) % stride == 0) {
      counts[permutation_rank(assignment_of(chain.config(), occupied))] += 1.0;
      ++samples;
    }
  }
  if (samples) {
    for (double& c : counts) c /= static_cast<double>(samples);
  }
  return counts;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw DomainError("total_variation: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

}  // namespace qnet
