#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "qnet/lattice.hpp"

namespace qnet {

using NodeId = std::uint32_t;

/// How an entanglement level maps to the hop distance it spans.
enum class RepeaterGeneration {
  Doubling,        ///< level l spans 2^(l-1) hops
  NextGeneration,  ///< level is the hop distance itself
};

const char* to_string(RepeaterGeneration generation);

/// Hop distance in the overlay spanned by an L_l link. Throws DomainError for l < 1.
std::int64_t hop_distance(int level, RepeaterGeneration generation);

struct EntangledLink {
  NodeId endpoint_a = 0;
  NodeId endpoint_b = 0;
  int level = 1;
  double probability = 1.0;
  double fidelity = 1.0;

  NodeId other(NodeId node) const { return node == endpoint_a ? endpoint_b : endpoint_a; }
  bool operator==(const EntangledLink&) const = default;
};

struct Incidence {
  NodeId neighbor;
  std::size_t link;
};

/// The overlay network N = (V, E): dense node ids [0, node_count) and
/// leveled probabilistic links, at most one per unordered pair.
class OverlayNetwork {
 public:
  /// Validates every link. Throws DomainError on a broken invariant.
  OverlayNetwork(std::size_t node_count, std::vector<EntangledLink> links,
                 RepeaterGeneration generation = RepeaterGeneration::Doubling);

  std::size_t node_count() const { return adjacency_.size(); }
  const std::vector<EntangledLink>& links() const { return links_; }
  const EntangledLink& link(std::size_t index) const { return links_.at(index); }
  RepeaterGeneration generation() const { return generation_; }

  std::span<const Incidence> incident(NodeId node) const;
  std::size_t degree(NodeId node) const { return incident(node).size(); }
  std::optional<std::size_t> find_link(NodeId a, NodeId b) const;

  bool operator==(const OverlayNetwork& other) const {
    return generation_ == other.generation_ && adjacency_.size() == other.adjacency_.size() &&
           links_ == other.links_;
  }

 private:
  std::vector<EntangledLink> links_;
  std::vector<std::vector<Incidence>> adjacency_;
  RepeaterGeneration generation_;
};

/// One term p_i |<Psi|psi_i>|^2 of a mixed link state.
struct FidelityComponent {
  double weight;
  std::complex<double> overlap;
};

/// F = sum_i p_i |<Psi|psi_i>|^2 from precomputed overlaps.
/// Throws DomainError unless the weights form a distribution (within 1e-9)
/// and every |overlap| <= 1.
double entanglement_fidelity(std::span<const FidelityComponent> mixture);

struct GeneratorSpec {
  std::size_t node_count = 0;  ///< 0 fills the lattice
  int lattice_side = 8;
  int dimension = 2;
  /// Pr_{L_l} for l = 1..r; r is the size of this list.
  std::vector<double> level_probabilities{1.0};
  /// Relative rate at which long links pick level l = 2..r. Empty selects
  /// the inverse k-th power law summed over each dyadic distance band.
  std::vector<double> level_weights;
  /// Per-level link fidelity; empty means 1.0 everywhere.
  std::vector<double> level_fidelities;
  int long_links_per_node = 1;
  int min_degree = 2;
  RepeaterGeneration generation = RepeaterGeneration::Doubling;
  std::uint64_t seed = 0;

  int max_level() const { return static_cast<int>(level_probabilities.size()); }
  std::size_t effective_node_count() const;
};

/// Throws ConfigError naming the offending field.
void validate(const GeneratorSpec& spec);

/// Inverse-power level weights for l = 2..max_level: sum of 1/d over
/// d in [2^(l-1), 2^l).
std::vector<double> inverse_power_level_weights(int max_level);

/// Lattice sites the generator plants the nodes on: node i sits at site i in
/// row-major order.
std::vector<LatticePosition> planted_layout(const GeneratorSpec& spec);

/// Builds a synthetic overlay on the planted layout: L_1 links between
/// lattice-adjacent nodes, then long links at lattice separation
/// hop_distance(l). Deterministic in spec.seed.
OverlayNetwork generate_overlay(const GeneratorSpec& spec);

/// One sampled instance of which links currently exist.
class LinkRealization {
 public:
  LinkRealization(const OverlayNetwork& network, std::vector<std::uint8_t> present, std::uint64_t seed);

  const OverlayNetwork& network() const { return *network_; }
  const std::vector<std::uint8_t>& present() const { return present_; }
  bool is_present(std::size_t link) const { return present_.at(link) != 0; }
  std::uint64_t seed() const { return seed_; }
  std::size_t present_count() const;

 private:
  const OverlayNetwork* network_;
  std::vector<std::uint8_t> present_;
  std::uint64_t seed_;
};

/// Each link present independently with its probability.
LinkRealization realize_links(const OverlayNetwork& network, std::uint64_t seed);

/// Every link present.
LinkRealization full_realization(const OverlayNetwork& network);

/// Line format:
///   nodes <count> generation <doubling|nextgen>
///   link <a> <b> level <l> prob <p> fidelity <f>
void write_network(std::ostream& out, const OverlayNetwork& network);
/// Throws ParseError with the offending line number.
OverlayNetwork read_network(std::istream& in);

}  // namespace qnet
