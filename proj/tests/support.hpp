#pragma once

#include <initializer_list>
#include <vector>

#include "qnet/basegraph.hpp"
#include "qnet/overlay.hpp"

namespace qnet::testing {

inline LatticePosition at(std::initializer_list<int> coords) { return LatticePosition{std::vector<int>(coords)}; }

inline EntangledLink link(NodeId a, NodeId b, double probability = 1.0, int level = 1, double fidelity = 1.0) {
  return EntangledLink{a, b, level, probability, fidelity};
}

inline Configuration place(int dimension, int side, std::vector<LatticePosition> positions) {
  return Configuration(BaseGraph(dimension, side), std::move(positions));
}

/// Path 0-1-...-(n-1) with probability-1 L_1 links.
inline OverlayNetwork path_network(std::size_t n) {
  std::vector<EntangledLink> links;
  for (NodeId i = 0; i + 1 < n; ++i) links.push_back(link(i, i + 1));
  return OverlayNetwork(n, links);
}

inline GeneratorSpec lattice_spec(int side, std::vector<double> probabilities = {1.0}, std::uint64_t seed = 1) {
  GeneratorSpec spec;
  spec.lattice_side = side;
  spec.level_probabilities = std::move(probabilities);
  spec.seed = seed;
  return spec;
}

}  // namespace qnet::testing
