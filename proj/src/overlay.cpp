#include "qnet/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "qnet/errors.hpp"
#include "qnet/rng.hpp"

namespace qnet {

const char* to_string(RepeaterGeneration generation) {
  return generation == RepeaterGeneration::Doubling ? "doubling" : "nextgen";
}

std::int64_t hop_distance(int level, RepeaterGeneration generation) {
  if (level < 1) throw DomainError("level must be >= 1, got " + std::to_string(level));
  if (generation == RepeaterGeneration::NextGeneration) return level;
  if (level > 62) throw DomainError("level too large for doubling: " + std::to_string(level));
  return std::int64_t{1} << (level - 1);
}

namespace {

std::uint64_t pair_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Returns an empty string when the link is well formed.
std::string link_problem(const EntangledLink& e, std::size_t node_count) {
  if (e.endpoint_a >= node_count || e.endpoint_b >= node_count) return "endpoint out of range";
  if (e.endpoint_a == e.endpoint_b) return "self-link on node " + std::to_string(e.endpoint_a);
  if (e.level < 1) return "level must be >= 1";
  if (!(e.probability > 0.0 && e.probability <= 1.0)) return "probability must lie in (0, 1]";
  if (!(e.fidelity >= 0.0 && e.fidelity <= 1.0)) return "fidelity must lie in [0, 1]";
  return {};
}

}  // namespace

OverlayNetwork::OverlayNetwork(std::size_t node_count, std::vector<EntangledLink> links,
                               RepeaterGeneration generation)
    : links_(std::move(links)), adjacency_(node_count), generation_(generation) {
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto& e = links_[i];
    if (auto problem = link_problem(e, node_count); !problem.empty()) {
      throw DomainError("link " + std::to_string(i) + ": " + problem);
    }
    if (!seen.insert(pair_key(e.endpoint_a, e.endpoint_b)).second) {
      throw DomainError("link " + std::to_string(i) + ": duplicate node pair");
    }
    adjacency_[e.endpoint_a].push_back({e.endpoint_b, i});
    adjacency_[e.endpoint_b].push_back({e.endpoint_a, i});
  }
}

std::span<const Incidence> OverlayNetwork::incident(NodeId node) const {
  if (node >= adjacency_.size()) throw DomainError("unknown node " + std::to_string(node));
  return adjacency_[node];
}

std::optional<std::size_t> OverlayNetwork::find_link(NodeId a, NodeId b) const {
  for (const auto& inc : incident(a)) {
    if (inc.neighbor == b) return inc.link;
  }
  return std::nullopt;
}

double entanglement_fidelity(std::span<const FidelityComponent> mixture) {
  constexpr double kTolerance = 1e-9;
  double total = 0.0;
  double fidelity = 0.0;
  for (const auto& c : mixture) {
    if (!(c.weight >= 0.0)) throw DomainError("fidelity: negative weight");
    const double overlap_sq = std::norm(c.overlap);
    if (overlap_sq > 1.0 + kTolerance) throw DomainError("fidelity: |overlap| exceeds 1");
    total += c.weight;
    fidelity += c.weight * overlap_sq;
  }
  if (std::abs(total - 1.0) > kTolerance) throw DomainError("fidelity: weights do not sum to 1");
  return std::clamp(fidelity, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Generator

std::size_t GeneratorSpec::effective_node_count() const {
  if (node_count) return node_count;
  std::size_t sites = 1;
  for (int i = 0; i < dimension; ++i) sites *= static_cast<std::size_t>(lattice_side);
  return sites;
}

void validate(const GeneratorSpec& spec) {
  if (spec.dimension < 1 || spec.dimension > 8) throw ConfigError("lattice.dimension must lie in [1, 8]");
  if (spec.lattice_side < 2) throw ConfigError("lattice.side must be >= 2");
  double sites = std::pow(static_cast<double>(spec.lattice_side), spec.dimension);
  if (sites > 1 << 24) throw ConfigError("lattice.side: side^dimension exceeds 2^24 sites");
  const auto nodes = spec.effective_node_count();
  if (nodes < 2) throw ConfigError("generator.node_count must be >= 2");
  if (static_cast<double>(nodes) > sites) {
    throw ConfigError("generator.node_count: " + std::to_string(nodes) + " nodes exceed lattice capacity " +
                      std::to_string(static_cast<long long>(sites)));
  }
  if (spec.level_probabilities.empty()) throw ConfigError("generator.level_probabilities must list >= 1 level");
  if (spec.max_level() > 30) throw ConfigError("generator.level_probabilities: at most 30 levels");
  for (std::size_t i = 0; i < spec.level_probabilities.size(); ++i) {
    const double p = spec.level_probabilities[i];
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("generator.level_probabilities: entries must lie in (0, 1]");
    if (i > 0 && p > spec.level_probabilities[i - 1]) {
      throw ConfigError("generator.level_probabilities: must be non-increasing in level");
    }
  }
  if (!spec.level_weights.empty()) {
    if (spec.level_weights.size() + 1 != spec.level_probabilities.size()) {
      throw ConfigError("generator.level_weights: need one weight per level 2..r");
    }
    for (double w : spec.level_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("generator.level_weights: entries must be >= 0");
    }
    if (std::accumulate(spec.level_weights.begin(), spec.level_weights.end(), 0.0) <= 0.0) {
      throw ConfigError("generator.level_weights: at least one weight must be positive");
    }
  }
  if (!spec.level_fidelities.empty()) {
    if (spec.level_fidelities.size() != spec.level_probabilities.size()) {
      throw ConfigError("generator.level_fidelities: need one fidelity per level");
    }
    for (double f : spec.level_fidelities) {
      if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("generator.level_fidelities: entries must lie in [0, 1]");
    }
  }
  if (spec.long_links_per_node < 0) throw ConfigError("generator.long_links_per_node must be >= 0");
  if (spec.min_degree < 1) throw ConfigError("generator.min_degree must be >= 1");
}

std::vector<double> inverse_power_level_weights(int max_level) {
  std::vector<double> weights;
  for (int level = 2; level <= max_level; ++level) {
    const std::int64_t lo = std::int64_t{1} << (level - 1);
    double w = 0.0;
    for (std::int64_t d = lo; d < 2 * lo; ++d) w += 1.0 / static_cast<double>(d);
    weights.push_back(w);
  }
  return weights;
}

std::vector<LatticePosition> planted_layout(const GeneratorSpec& spec) {
  validate(spec);
  const BaseGraph graph(spec.dimension, spec.lattice_side);
  std::vector<LatticePosition> layout;
  const auto nodes = spec.effective_node_count();
  layout.reserve(nodes);
  for (std::size_t i = 0; i < nodes; ++i) layout.push_back(graph.site(static_cast<std::int64_t>(i)));
  return layout;
}

namespace {

class OverlayBuilder {
 public:
  OverlayBuilder(const GeneratorSpec& spec)
      : spec_(spec),
        graph_(spec.dimension, spec.lattice_side),
        layout_(planted_layout(spec)),
        node_at_site_(graph_.site_count(), -1),
        degree_(layout_.size(), 0) {
    for (std::size_t i = 0; i < layout_.size(); ++i) node_at_site_[graph_.site_index(layout_[i])] = static_cast<std::int64_t>(i);
  }

  bool linked(NodeId a, NodeId b) const { return keys_.count(pair_key(a, b)) > 0; }

  void add(NodeId a, NodeId b, int level) {
    if (a > b) std::swap(a, b);
    keys_.insert(pair_key(a, b));
    const double fidelity = spec_.level_fidelities.empty() ? 1.0 : spec_.level_fidelities[level - 1];
    links_.push_back({a, b, level, spec_.level_probabilities[level - 1], fidelity});
    ++degree_[a];
    ++degree_[b];
  }

  /// Nodes whose site lies at exactly L1 distance `d` from node x's site.
  std::vector<NodeId> nodes_at_distance(NodeId x, std::int64_t d) const {
    std::vector<NodeId> found;
    if (d > graph_.max_distance()) return found;
    LatticePosition pos = layout_[x];
    visit_shell(pos, 0, d, found);
    return found;
  }

  std::size_t degree(NodeId x) const { return degree_[x]; }
  std::size_t node_count() const { return layout_.size(); }
  const LatticePosition& site_of(NodeId x) const { return layout_[x]; }

  std::optional<NodeId> node_at(const LatticePosition& pos) const {
    if (!graph_.contains(pos)) return std::nullopt;
    const auto node = node_at_site_[graph_.site_index(pos)];
    if (node < 0) return std::nullopt;
    return static_cast<NodeId>(node);
  }

  std::vector<EntangledLink> take_links() {
    std::sort(links_.begin(), links_.end(), [](const EntangledLink& l, const EntangledLink& r) {
      return std::tie(l.endpoint_a, l.endpoint_b) < std::tie(r.endpoint_a, r.endpoint_b);
    });
    return std::move(links_);
  }

 private:
  // Enumerates offsets with |offset|_1 == remaining over axes [axis, k).
  void visit_shell(LatticePosition& pos, int axis, std::int64_t remaining, std::vector<NodeId>& found) const {
    const int k = graph_.dimension();
    const int base = pos.coords[axis];
    if (axis == k - 1) {
      for (int sign : {-1, 1}) {
        if (remaining == 0 && sign == 1) break;
        const std::int64_t c = base + sign * remaining;
        if (c < 0 || c >= graph_.side()) continue;
        pos.coords[axis] = static_cast<int>(c);
        if (auto node = node_at(pos)) found.push_back(*node);
      }
      pos.coords[axis] = base;
      return;
    }
    for (std::int64_t step = -remaining; step <= remaining; ++step) {
      const std::int64_t c = base + step;
      if (c < 0 || c >= graph_.side()) continue;
      pos.coords[axis] = static_cast<int>(c);
      visit_shell(pos, axis + 1, remaining - std::abs(step), found);
    }
    pos.coords[axis] = base;
  }

  const GeneratorSpec& spec_;
  BaseGraph graph_;
  std::vector<LatticePosition> layout_;
  std::vector<std::int64_t> node_at_site_;
  std::vector<std::size_t> degree_;
  std::unordered_set<std::uint64_t> keys_;
  std::vector<EntangledLink> links_;
};

int sample_level(Rng& rng, const std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return static_cast<int>(i) + 2;
    u -= weights[i];
  }
  // Rounding left u at the top edge: take the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return static_cast<int>(i) + 2;
  }
  return 2;
}

}  // namespace

OverlayNetwork generate_overlay(const GeneratorSpec& spec) {
  validate(spec);
  OverlayBuilder builder(spec);
  const int r = spec.max_level();
  const auto n = static_cast<NodeId>(builder.node_count());

  // L_1: lattice neighbours along each axis.
  const std::int64_t unit = hop_distance(1, spec.generation);
  for (NodeId x = 0; x < n; ++x) {
    for (int axis = 0; axis < spec.dimension; ++axis) {
      LatticePosition next = builder.site_of(x);
      next.coords[axis] += static_cast<int>(unit);
      if (auto y = builder.node_at(next)) builder.add(x, *y, 1);
    }
  }

  Rng rng(derive_seed(spec.seed, "generate.long"));
  if (r >= 2 && spec.long_links_per_node > 0) {
    std::vector<double> weights = spec.level_weights;
    if (weights.empty()) {
      if (spec.generation == RepeaterGeneration::Doubling) {
        weights = inverse_power_level_weights(r);
      } else {
        for (int level = 2; level <= r; ++level) weights.push_back(1.0 / level);
      }
    }
    constexpr int kAttempts = 8;
    for (NodeId x = 0; x < n; ++x) {
      for (int t = 0; t < spec.long_links_per_node; ++t) {
        for (int attempt = 0; attempt < kAttempts; ++attempt) {
          const int level = sample_level(rng, weights);
          const auto candidates = builder.nodes_at_distance(x, hop_distance(level, spec.generation));
          if (candidates.empty()) continue;
          const NodeId y = candidates[rng.below(candidates.size())];
          if (builder.linked(x, y)) continue;
          builder.add(x, y, level);
          break;
        }
      }
    }
  }

  // Top up low-degree nodes with the shortest available level.
  for (NodeId x = 0; x < n; ++x) {
    for (int level = 1; level <= r && builder.degree(x) < static_cast<std::size_t>(spec.min_degree); ++level) {
      auto candidates = builder.nodes_at_distance(x, hop_distance(level, spec.generation));
      for (std::size_t i = candidates.size(); i > 1; --i) std::swap(candidates[i - 1], candidates[rng.below(i)]);
      for (NodeId y : candidates) {
        if (builder.degree(x) >= static_cast<std::size_t>(spec.min_degree)) break;
        if (!builder.linked(x, y)) builder.add(x, y, level);
      }
    }
    if (builder.degree(x) == 0) {
      throw ConfigError("generator: node " + std::to_string(x) + " cannot be given any link at the configured levels");
    }
  }

  return OverlayNetwork(n, builder.take_links(), spec.generation);
}

// ---------------------------------------------------------------------------
// Realization

LinkRealization::LinkRealization(const OverlayNetwork& network, std::vector<std::uint8_t> present, std::uint64_t seed)
    : network_(&network), present_(std::move(present)), seed_(seed) {
  if (present_.size() != network.links().size()) throw DomainError("realization size does not match link count");
}

std::size_t LinkRealization::present_count() const {
  return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), std::uint8_t{1}));
}

LinkRealization realize_links(const OverlayNetwork& network, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> present;
  present.reserve(network.links().size());
  for (const auto& e : network.links()) present.push_back(rng.bernoulli(e.probability) ? 1 : 0);
  return LinkRealization(network, std::move(present), seed);
}

LinkRealization full_realization(const OverlayNetwork& network) {
  return LinkRealization(network, std::vector<std::uint8_t>(network.links().size(), 1), 0);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace

void write_network(std::ostream& out, const OverlayNetwork& network) {
  out << "nodes " << network.node_count() << " generation " << to_string(network.generation()) << '\n';
  for (const auto& e : network.links()) {
    out << "link " << e.endpoint_a << ' ' << e.endpoint_b << " level " << e.level << " prob "
        << format_real(e.probability) << " fidelity " << format_real(e.fidelity) << '\n';
  }
}

OverlayNetwork read_network(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> node_count;
  RepeaterGeneration generation = RepeaterGeneration::Doubling;
  std::vector<EntangledLink> links;
  std::unordered_set<std::uint64_t> seen;

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string keyword;
    if (!(fields >> keyword) || keyword[0] == '#') continue;
    if (keyword == "nodes") {
      if (node_count) throw ParseError("duplicate header", line_no);
      long long count = -1;
      std::string gen_kw, gen;
      if (!(fields >> count >> gen_kw >> gen) || count < 0 || gen_kw != "generation") {
        throw ParseError("expected 'nodes <count> generation <doubling|nextgen>'", line_no);
      }
      if (gen == "doubling") {
        generation = RepeaterGeneration::Doubling;
      } else if (gen == "nextgen") {
        generation = RepeaterGeneration::NextGeneration;
      } else {
        throw ParseError("unknown generation '" + gen + "'", line_no);
      }
      node_count = static_cast<std::size_t>(count);
    } else if (keyword == "link") {
      if (!node_count) throw ParseError("link before 'nodes' header", line_no);
      long long a = -1, b = -1;
      EntangledLink e;
      std::string kw_level, kw_prob, kw_fid;
      if (!(fields >> a >> b >> kw_level >> e.level >> kw_prob >> e.probability >> kw_fid >> e.fidelity) ||
          kw_level != "level" || kw_prob != "prob" || kw_fid != "fidelity" || a < 0 || b < 0) {
        throw ParseError("expected 'link <a> <b> level <l> prob <p> fidelity <f>'", line_no);
      }
      std::string extra;
      if (fields >> extra) throw ParseError("trailing field '" + extra + "'", line_no);
      e.endpoint_a = static_cast<NodeId>(a);
      e.endpoint_b = static_cast<NodeId>(b);
      if (auto problem = link_problem(e, *node_count); !problem.empty()) throw ParseError(problem, line_no);
      if (!seen.insert(pair_key(e.endpoint_a, e.endpoint_b)).second) throw ParseError("duplicate node pair", line_no);
      links.push_back(e);
    } else {
      throw ParseError("unknown record '" + keyword + "'", line_no);
    }
  }
  if (!node_count) throw ParseError("missing 'nodes' header");
  return OverlayNetwork(*node_count, std::move(links), generation);
}

}  // namespace qnet
