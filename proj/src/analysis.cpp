#include "qnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "qnet/embedding.hpp"
#include "qnet/errors.hpp"
#include "qnet/rng.hpp"

namespace qnet {

namespace {

/// Compressed adjacency over a subset of links.
struct Csr {
  std::vector<std::size_t> offsets;
  std::vector<NodeId> targets;

  std::size_t size() const { return offsets.size() - 1; }
  std::span<const NodeId> neighbors(NodeId v) const {
    return {targets.data() + offsets[v], offsets[v + 1] - offsets[v]};
  }
};

template <typename Keep>
Csr build_csr(const LinkRealization& realization, Keep&& keep) {
  const auto& network = realization.network();
  const std::size_t n = network.node_count();
  Csr g;
  g.offsets.assign(n + 1, 0);
  const auto& links = network.links();
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (!realization.is_present(i) || !keep(links[i])) continue;
    ++g.offsets[links[i].endpoint_a + 1];
    ++g.offsets[links[i].endpoint_b + 1];
  }
  for (std::size_t v = 0; v < n; ++v) g.offsets[v + 1] += g.offsets[v];
  g.targets.resize(g.offsets[n]);
  std::vector<std::size_t> fill(g.offsets.begin(), g.offsets.end() - 1);
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (!realization.is_present(i) || !keep(links[i])) continue;
    g.targets[fill[links[i].endpoint_a]++] = links[i].endpoint_b;
    g.targets[fill[links[i].endpoint_b]++] = links[i].endpoint_a;
  }
  return g;
}

constexpr std::int64_t kUnreached = -1;

/// BFS from `root`; returns (eccentricity, farthest node, reached count).
std::tuple<std::int64_t, NodeId, std::size_t> bfs(const Csr& g, NodeId root, std::vector<std::int64_t>& dist,
                                                  std::vector<NodeId>& queue) {
  std::fill(dist.begin(), dist.end(), kUnreached);
  queue.clear();
  dist[root] = 0;
  queue.push_back(root);
  NodeId far = root;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId v = queue[head];
    if (dist[v] > dist[far]) far = v;
    for (NodeId w : g.neighbors(v)) {
      if (dist[w] == kUnreached) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return {dist[far], far, queue.size()};
}

/// Exact diameter of the component holding `members` (all of which must be
/// connected); nullopt if they are not. Eccentricity bounds from each BFS
/// prune nodes that cannot raise the maximum, so few roots are expanded.
std::optional<std::int64_t> exact_diameter(const Csr& g, const std::vector<NodeId>& members) {
  if (members.empty()) return 0;
  std::vector<std::int64_t> dist(g.size());
  std::vector<NodeId> queue;
  std::vector<std::int64_t> lower(members.size(), 0);
  std::vector<std::int64_t> upper(members.size(), std::numeric_limits<std::int64_t>::max());
  std::vector<std::size_t> candidates(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) candidates[i] = i;

  std::int64_t diameter = 0;
  bool pick_upper = true;
  std::size_t next = 0;
  while (!candidates.empty()) {
    const NodeId root = members[next];
    auto [ecc, far, reached] = bfs(g, root, dist, queue);
    if (reached != members.size()) return std::nullopt;
    diameter = std::max(diameter, ecc);
    for (std::size_t i = 0; i < members.size(); ++i) {
      const std::int64_t d = dist[members[i]];
      lower[i] = std::max({lower[i], d, ecc - d});
      upper[i] = std::min(upper[i], ecc + d);
    }
    lower[next] = upper[next] = ecc;
    std::erase_if(candidates, [&](std::size_t i) { return i == next || upper[i] <= diameter; });
    if (candidates.empty()) break;
    // Alternate between the most promising and the most central candidate.
    next = *std::max_element(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      return pick_upper ? upper[a] < upper[b] : lower[a] > lower[b];
    });
    pick_upper = !pick_upper;
  }
  return diameter;
}

std::vector<NodeId> largest_component(const Csr& g) {
  const std::size_t n = g.size();
  std::vector<std::int64_t> dist(n);
  std::vector<NodeId> queue;
  std::vector<bool> seen(n, false);
  std::vector<NodeId> best;
  for (NodeId v = 0; v < n; ++v) {
    if (seen[v]) continue;
    bfs(g, v, dist, queue);
    for (NodeId w : queue) seen[w] = true;
    if (queue.size() > best.size()) best = queue;
  }
  std::sort(best.begin(), best.end());
  return best;
}

}  // namespace

DiameterResult measured_diameter(const LinkRealization& realization, const Configuration& config,
                                 const DiameterOptions& options) {
  const auto& network = realization.network();
  if (network.node_count() == 0) throw DomainError("measured_diameter: empty network");
  if (config.node_count() < network.node_count()) throw DomainError("measured_diameter: unplaced nodes");

  const Csr g = build_csr(realization, [](const EntangledLink&) { return true; });
  const auto component = largest_component(g);

  DiameterResult result;
  result.node_count = network.node_count();
  result.component_size = component.size();
  result.coverage = static_cast<double>(component.size()) / static_cast<double>(network.node_count());

  if (component.size() <= options.exact_limit) {
    result.diameter = *exact_diameter(g, component);
    result.exact = true;
    result.sources = component.size();
    return result;
  }

  // Double sweep from sampled roots: each sweep yields a true eccentricity,
  // so the estimate never exceeds the exact diameter.
  Rng rng(derive_seed(options.seed, "diameter.samples"));
  std::vector<std::int64_t> dist(g.size());
  std::vector<NodeId> queue;
  result.exact = false;
  for (std::size_t s = 0; s < options.samples; ++s) {
    const NodeId root = component[rng.below(component.size())];
    auto [ecc_root, far, reached] = bfs(g, root, dist, queue);
    auto [ecc_far, far2, reached2] = bfs(g, far, dist, queue);
    result.diameter = std::max({result.diameter, ecc_root, ecc_far});
    result.sources += 2;
  }
  return result;
}

// ---------------------------------------------------------------------------

double analytic_m(double n, double gamma, int k, double K) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("analytic_m: gamma must lie in (0, 1)");
  if (!(K > 0.0)) throw DomainError("analytic_m: K must be positive");
  if (!(4.0 * gamma - k > 0.0)) throw DomainError("analytic_m: requires 4*gamma > k");
  const double ln_n = std::log(n);
  const double lnln = ln_n > 0.0 ? std::log(ln_n) : -1.0;
  const double lnlnln = lnln > 0.0 ? std::log(lnln) : -1.0;
  if (!(lnlnln > 0.0)) throw DomainError("analytic_m: n too small, log log log n must be positive (n > e^e)");
  return (lnln - lnlnln + std::log(4.0 * gamma - k) - std::log(K)) / std::log(1.0 / gamma);
}

double analytic_gamma_pow_m(double n, double gamma, int k, double K) {
  if (!(4.0 * gamma - k > 0.0)) throw DomainError("analytic_gamma_pow_m: requires 4*gamma > k");
  const double ln_n = std::log(n);
  if (!(ln_n > 1.0)) throw DomainError("analytic_gamma_pow_m: n too small");
  return K * std::log(ln_n) / ((4.0 * gamma - k) * ln_n);
}

namespace {

SaturatingValue saturating_exp(double log_value, double scale = 1.0) {
  constexpr double kMaxLog = 709.0;
  constexpr double kMinLog = -745.0;
  if (log_value > kMaxLog) return {std::numeric_limits<double>::infinity(), true};
  if (log_value < kMinLog) return {0.0, true};
  const double v = scale * std::exp(log_value);
  return {v, v == 0.0 || std::isinf(v)};
}

void check_bound_inputs(double n, double gamma, int k, double Z) {
  if (!(n >= 1.0)) throw DomainError("event bound: n must be >= 1");
  if (!(Z > 0.0)) throw DomainError("event bound: Z must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("event bound: gamma must lie in (0, 1)");
  if (4.0 * gamma - k < 0.0) throw DomainError("event bound: requires 4*gamma >= k");
}

}  // namespace

SaturatingValue event_probability_bound(double n, double gamma, int k, int level, double Z) {
  check_bound_inputs(n, gamma, k, Z);
  if (level < 1) throw DomainError("event bound: level must be >= 1");
  const double exponent = Z * std::pow(n, std::pow(gamma, level - 1)) * (4.0 * gamma - k);
  return saturating_exp(4.0 * std::log(n) - exponent);
}

SaturatingValue conjunction_probability_bound(double n, double gamma, int k, int levels_m, double Z) {
  check_bound_inputs(n, gamma, k, Z);
  if (levels_m < 1) throw DomainError("event bound: m must be >= 1");
  const double exponent = Z * std::pow(n, std::pow(gamma, levels_m)) * (4.0 * gamma - k);
  return saturating_exp(4.0 * std::log(n) - exponent, levels_m);
}

// ---------------------------------------------------------------------------

TessellationReport tessellate_and_check(const LinkRealization& realization, const Configuration& config,
                                        double gamma, int levels_m, double Z) {
  const auto& graph = config.graph();
  if (graph.dimension() != 2) throw DomainError("tessellation is defined for k = 2 lattices");
  if (!(gamma > 0.5 && gamma < 1.0)) throw ConfigError("analysis.gamma must lie in (k/4, 1) = (0.5, 1)");
  if (levels_m < 1) throw ConfigError("analysis.m must be >= 1");
  const auto& network = realization.network();
  if (config.node_count() < network.node_count()) throw DomainError("tessellation: unplaced nodes");

  TessellationReport report;
  report.gamma = gamma;
  report.Z = Z;
  report.levels_requested = levels_m;

  const double side = graph.side();
  std::vector<int> tile_sides;
  for (int i = 1; i <= levels_m; ++i) {
    const int tile = std::max(1, static_cast<int>(std::floor(std::pow(side, std::pow(gamma, i)))));
    tile_sides.push_back(tile);
    if (tile == 1 && i < levels_m) {
      report.clamped = true;
      break;
    }
  }
  const int m = static_cast<int>(tile_sides.size());
  report.levels_m = m;

  // origin[level][node]: lower corner of the node's square at that level,
  // nested inside its parent; level 0 is the whole box.
  const std::size_t n = network.node_count();
  using Origin = std::pair<int, int>;
  std::vector<std::vector<Origin>> origin(m + 1, std::vector<Origin>(n, {0, 0}));
  for (int level = 1; level <= m; ++level) {
    const int tile = tile_sides[level - 1];
    for (NodeId v = 0; v < n; ++v) {
      const auto& c = config.position(v).coords;
      const auto [px, py] = origin[level - 1][v];
      origin[level][v] = {px + (c[0] - px) / tile * tile, py + (c[1] - py) / tile * tile};
    }
  }

  const auto& links = network.links();
  report.all_events_violated = true;
  for (int level = 1; level <= m; ++level) {
    std::map<Origin, std::set<Origin>> children;
    for (NodeId v = 0; v < n; ++v) children[origin[level - 1][v]].insert(origin[level][v]);
    TessellationLevel info;
    info.level = level;
    info.square_side = tile_sides[level - 1];
    for (const auto& [parent, kids] : children) info.sibling_pairs += kids.size() * (kids.size() - 1) / 2;

    std::set<std::tuple<Origin, Origin, Origin>> joined;
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (!realization.is_present(i)) continue;
      const auto a = links[i].endpoint_a, b = links[i].endpoint_b;
      if (origin[level - 1][a] != origin[level - 1][b]) continue;
      auto sa = origin[level][a], sb = origin[level][b];
      if (sa == sb) continue;
      if (sb < sa) std::swap(sa, sb);
      joined.insert({origin[level - 1][a], sa, sb});
    }
    info.connected_pairs = joined.size();
    info.event_violated = info.connected_pairs == info.sibling_pairs;
    const auto bound = event_probability_bound(side, gamma, 2, level, Z);
    info.event_probability_bound = bound.value;
    info.bound_saturated = bound.saturated;
    report.all_events_violated = report.all_events_violated && info.event_violated;
    report.events_violated.push_back(info.event_violated);
    report.levels.push_back(info);
  }

  report.bound_value = std::pow(2.0, m + 2) * std::pow(side, std::pow(gamma, m));
  const auto diameter = measured_diameter(realization, config);
  report.measured_diameter = diameter.diameter;
  report.coverage = diameter.coverage;
  report.bound_holds = static_cast<double>(report.measured_diameter) <= report.bound_value;

  // Level-1 squares as induced subgraphs.
  std::map<Origin, std::vector<NodeId>> squares;
  for (NodeId v = 0; v < n; ++v) squares[origin[1][v]].push_back(v);
  const Csr induced = build_csr(realization, [&](const EntangledLink& e) {
    return origin[1][e.endpoint_a] == origin[1][e.endpoint_b];
  });
  for (const auto& [corner, members] : squares) {
    const auto d = exact_diameter(induced, members);
    if (!d) {
      report.subsquare_vacuous = true;
      continue;
    }
    report.max_subsquare_diameter = std::max(report.max_subsquare_diameter, *d);
  }
  report.subsquare_bound = 2.0 * static_cast<double>(report.max_subsquare_diameter) + 1.0;
  report.subsquare_bound_holds = static_cast<double>(report.measured_diameter) <= report.subsquare_bound;
  return report;
}

// ---------------------------------------------------------------------------

double ScalingReport::max_ratio() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& row : rows) best = std::max(best, row.ratio);
  return best;
}

double ScalingReport::min_ratio() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) best = std::min(best, row.ratio);
  return best;
}

namespace {

template <typename T>
void resize_repeating_last(std::vector<T>& values, std::size_t size) {
  if (values.empty()) return;
  values.resize(size, values.back());
}

}  // namespace

ScalingReport scaling_experiment(const ScalingOptions& options) {
  if (options.sides.empty()) throw ConfigError("analysis.sizes must list at least one side length");
  for (std::size_t i = 0; i < options.sides.size(); ++i) {
    const int side = options.sides[i];
    if (side < 2 || (side & (side - 1)) != 0) throw ConfigError("analysis.sizes: each side must be a power of two");
    if (i > 0 && side <= options.sides[i - 1]) throw ConfigError("analysis.sizes must be strictly ascending");
  }
  if (options.trials < 1) throw ConfigError("analysis.scaling_trials must be >= 1");

  ScalingReport report;
  for (const int side : options.sides) {
    GeneratorSpec spec = options.generator;
    spec.lattice_side = side;
    spec.node_count = 0;
    if (options.auto_levels) {
      const auto r = static_cast<std::size_t>(std::log2(side)) + 1;
      resize_repeating_last(spec.level_probabilities, r);
      resize_repeating_last(spec.level_fidelities, r);
      if (spec.level_weights.size() + 1 != r) spec.level_weights.clear();
    }
    spec.seed = derive_seed(options.seed, "scaling.generate", static_cast<std::uint64_t>(side));
    const auto network = generate_overlay(spec);
    const BaseGraph graph(spec.dimension, side);

    std::optional<Configuration> placement;
    if (options.placement == ScalingPlacement::Planted) {
      placement.emplace(graph, planted_layout(spec));
    } else {
      auto initial = random_configuration(graph, default_occupied_sites(graph, network.node_count()),
                                          derive_seed(options.seed, "scaling.init", static_cast<std::uint64_t>(side)));
      SwapChain chain(network, std::move(initial),
                      derive_seed(options.seed, "scaling.chain", static_cast<std::uint64_t>(side)));
      placement.emplace(chain.run(options.chain_steps));
    }

    EnsembleOptions ensemble;
    ensemble.trials = options.trials;
    ensemble.seed = derive_seed(options.seed, "scaling.route", static_cast<std::uint64_t>(side));
    ensemble.hop_limit = options.hop_limit;
    ensemble.metric = options.metric;
    ensemble.fixed_pair = options.fixed_pair;
    const auto summary = route_ensemble(network, *placement, ensemble);

    ScalingRow row;
    row.side = side;
    row.n = graph.site_count();
    const double lg = std::log2(static_cast<double>(row.n));
    row.log2n_sq = lg * lg;
    row.mean_hops = summary.mean_hops;
    row.ratio = summary.mean_hops / row.log2n_sq;
    row.delivery_rate = summary.delivery_rate;
    report.rows.push_back(row);
  }
  return report;
}

std::string scaling_csv(const ScalingReport& report) {
  std::string out = "side,n,mean_hops,log2n_sq,ratio,delivery_rate\n";
  char buf[256];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%d,%lld,%.6f,%.6f,%.6f,%.6f\n", row.side, static_cast<long long>(row.n),
                  row.mean_hops, row.log2n_sq, row.ratio, row.delivery_rate);
    out += buf;
  }
  return out;
}

std::string tessellation_csv(const TessellationReport& report) {
  std::string out = "level,square_side,sibling_pairs,connected_pairs,event_violated,event_probability_bound,bound_saturated\n";
  char buf[256];
  for (const auto& level : report.levels) {
    std::snprintf(buf, sizeof buf, "%d,%d,%zu,%zu,%d,%.6e,%d\n", level.level, level.square_side, level.sibling_pairs,
                  level.connected_pairs, level.event_violated ? 1 : 0, level.event_probability_bound,
                  level.bound_saturated ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace qnet
