#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "qnet/lattice.hpp"
#include "qnet/overlay.hpp"

namespace qnet {

/// Injective assignment of overlay nodes to lattice sites (phi: V -> G^k).
class Configuration {
 public:
  /// Throws DomainError if a position is off-lattice or two nodes share a site.
  Configuration(BaseGraph graph, std::vector<LatticePosition> positions);

  const BaseGraph& graph() const { return graph_; }
  std::size_t node_count() const { return positions_.size(); }
  bool is_placed(NodeId node) const { return node < positions_.size(); }

  /// Throws DomainError for an unplaced node.
  const LatticePosition& position(NodeId node) const;
  const std::vector<LatticePosition>& positions() const { return positions_; }

  /// Exchanges the sites of two nodes; every other node keeps its site.
  void swap_positions(NodeId x, NodeId y);

  bool operator==(const Configuration&) const = default;

 private:
  BaseGraph graph_;
  std::vector<LatticePosition> positions_;
};

/// How the per-node normalizer H_n aggregates contact distances.
enum class NormalizerForm {
  InversePower,  ///< sum_z d(x,z)^-k
  Literal,       ///< sum_z d(x,z)
};

/// Which per-link factor the likelihood multiplies.
enum class LikelihoodModel {
  Corrected,   ///< d^-k / H_n + c, i.e. the overlay probability itself
  Structural,  ///< d^-k / H_n with c = 0
  Kernel,      ///< d^-k alone; the density the swap chain samples
};

/// Target L1 separation 2^(l-1) of an L_l link. Throws DomainError for l < 1.
std::int64_t level_distance(int level);

/// H_n over the entangled contacts of `node`. Throws DomainError when the
/// node has no contacts.
double normalizer(const Configuration& config, const OverlayNetwork& network, NodeId node,
                  NormalizerForm form = NormalizerForm::InversePower);

/// d(phi(a), phi(b))^-k / H_n(a) for link `link`, H_n taken at endpoint_a.
double structural_probability(const Configuration& config, const OverlayNetwork& network, std::size_t link,
                              NormalizerForm form = NormalizerForm::InversePower);

/// c = Pr_{L_l} - structural term. May be negative.
double correction_constant(const Configuration& config, const OverlayNetwork& network, std::size_t link,
                           NormalizerForm form = NormalizerForm::InversePower);

/// structural term + c; reproduces the link probability for any placement.
double connection_probability(const Configuration& config, const OverlayNetwork& network, std::size_t link,
                              NormalizerForm form = NormalizerForm::InversePower);

inline constexpr double kNoMass = -std::numeric_limits<double>::infinity();

/// Per-link log factors, in link order.
std::vector<double> log_likelihood_terms(const Configuration& config, const OverlayNetwork& network,
                                         LikelihoodModel model,
                                         NormalizerForm form = NormalizerForm::InversePower);

/// ln Pr(E | phi). Returns kNoMass when a corrected factor is <= 0;
/// structural factors are clamped below at 1e-300.
double log_likelihood(const Configuration& config, const OverlayNetwork& network, LikelihoodModel model,
                      NormalizerForm form = NormalizerForm::InversePower);

/// Lines `place <node> <c_0> ... <c_{k-1}>` ordered by node id.
void write_configuration(std::ostream& out, const Configuration& config);

/// Reads placements for nodes 0..count-1 in any order. Throws ParseError on
/// malformed lines, gaps, duplicates or off-lattice sites.
Configuration read_configuration(std::istream& in, const BaseGraph& graph);

}  // namespace qnet
