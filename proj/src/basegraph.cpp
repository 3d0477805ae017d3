#include "qnet/basegraph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "qnet/errors.hpp"

namespace qnet {

std::string to_string(const LatticePosition& pos) {
  std::string out = "(";
  for (std::size_t i = 0; i < pos.coords.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(pos.coords[i]);
  }
  return out + ")";
}

std::int64_t l1_distance(const LatticePosition& a, const LatticePosition& b) {
  if (a.dimension() != b.dimension()) {
    throw DomainError("l1_distance: dimension mismatch " + to_string(a) + " vs " + to_string(b));
  }
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    sum += std::abs(static_cast<std::int64_t>(a.coords[i]) - b.coords[i]);
  }
  return sum;
}

BaseGraph::BaseGraph(int dimension, int side) : dimension_(dimension), side_(side), site_count_(1) {
  if (dimension < 1) throw DomainError("BaseGraph: dimension must be >= 1");
  if (side < 2) throw DomainError("BaseGraph: side must be >= 2");
  for (int i = 0; i < dimension; ++i) {
    if (site_count_ > (std::int64_t{1} << 40) / side) throw DomainError("BaseGraph: lattice too large");
    site_count_ *= side;
  }
}

bool BaseGraph::contains(const LatticePosition& pos) const {
  if (pos.dimension() != static_cast<std::size_t>(dimension_)) return false;
  return std::all_of(pos.coords.begin(), pos.coords.end(), [&](int c) { return c >= 0 && c < side_; });
}

std::int64_t BaseGraph::site_index(const LatticePosition& pos) const {
  if (!contains(pos)) throw DomainError("site " + to_string(pos) + " is outside the lattice");
  std::int64_t index = 0;
  for (int c : pos.coords) index = index * side_ + c;
  return index;
}

LatticePosition BaseGraph::site(std::int64_t index) const {
  if (index < 0 || index >= site_count_) throw DomainError("site index out of range");
  LatticePosition pos{std::vector<int>(dimension_)};
  for (int i = dimension_ - 1; i >= 0; --i) {
    pos.coords[i] = static_cast<int>(index % side_);
    index /= side_;
  }
  return pos;
}

// ---------------------------------------------------------------------------

Configuration::Configuration(BaseGraph graph, std::vector<LatticePosition> positions)
    : graph_(graph), positions_(std::move(positions)) {
  std::unordered_set<std::int64_t> used;
  for (std::size_t node = 0; node < positions_.size(); ++node) {
    const auto& pos = positions_[node];
    if (!graph_.contains(pos)) {
      throw DomainError("node " + std::to_string(node) + " placed off-lattice at " + to_string(pos));
    }
    if (!used.insert(graph_.site_index(pos)).second) {
      throw DomainError("node " + std::to_string(node) + " shares site " + to_string(pos));
    }
  }
}

const LatticePosition& Configuration::position(NodeId node) const {
  if (!is_placed(node)) throw DomainError("node " + std::to_string(node) + " has no placement");
  return positions_[node];
}

void Configuration::swap_positions(NodeId x, NodeId y) {
  if (!is_placed(x) || !is_placed(y)) throw DomainError("swap_positions: unplaced node");
  std::swap(positions_[x], positions_[y]);
}

// ---------------------------------------------------------------------------

std::int64_t level_distance(int level) {
  if (level < 1) throw DomainError("level must be >= 1, got " + std::to_string(level));
  if (level > 62) throw DomainError("level too large: " + std::to_string(level));
  return std::int64_t{1} << (level - 1);
}

namespace {

double inverse_power(std::int64_t d, int k) { return std::pow(static_cast<double>(d), -k); }

void check_network_fits(const Configuration& config, const OverlayNetwork& network) {
  if (config.node_count() < network.node_count()) {
    throw DomainError("configuration places " + std::to_string(config.node_count()) + " of " +
                      std::to_string(network.node_count()) + " nodes");
  }
}

}  // namespace

double normalizer(const Configuration& config, const OverlayNetwork& network, NodeId node, NormalizerForm form) {
  const auto contacts = network.incident(node);
  if (contacts.empty()) throw DomainError("normalizer: node " + std::to_string(node) + " has no contacts");
  const int k = config.graph().dimension();
  const auto& here = config.position(node);
  double sum = 0.0;
  for (const auto& inc : contacts) {
    const auto d = l1_distance(here, config.position(inc.neighbor));
    sum += form == NormalizerForm::InversePower ? inverse_power(d, k) : static_cast<double>(d);
  }
  return sum;
}

double structural_probability(const Configuration& config, const OverlayNetwork& network, std::size_t link,
                              NormalizerForm form) {
  const auto& e = network.link(link);
  const auto d = l1_distance(config.position(e.endpoint_a), config.position(e.endpoint_b));
  return inverse_power(d, config.graph().dimension()) / normalizer(config, network, e.endpoint_a, form);
}

double correction_constant(const Configuration& config, const OverlayNetwork& network, std::size_t link,
                           NormalizerForm form) {
  return network.link(link).probability - structural_probability(config, network, link, form);
}

double connection_probability(const Configuration& config, const OverlayNetwork& network, std::size_t link,
                              NormalizerForm form) {
  return structural_probability(config, network, link, form) + correction_constant(config, network, link, form);
}

std::vector<double> log_likelihood_terms(const Configuration& config, const OverlayNetwork& network,
                                         LikelihoodModel model, NormalizerForm form) {
  check_network_fits(config, network);
  constexpr double kFloor = 1e-300;
  const int k = config.graph().dimension();
  std::vector<double> terms;
  terms.reserve(network.links().size());
  for (std::size_t i = 0; i < network.links().size(); ++i) {
    switch (model) {
      case LikelihoodModel::Corrected: {
        const double factor = connection_probability(config, network, i, form);
        terms.push_back(factor > 0.0 ? std::log(factor) : kNoMass);
        break;
      }
      case LikelihoodModel::Structural:
        terms.push_back(std::log(std::max(structural_probability(config, network, i, form), kFloor)));
        break;
      case LikelihoodModel::Kernel: {
        const auto& e = network.link(i);
        const auto d = l1_distance(config.position(e.endpoint_a), config.position(e.endpoint_b));
        terms.push_back(-k * std::log(static_cast<double>(d)));
        break;
      }
    }
  }
  return terms;
}

double log_likelihood(const Configuration& config, const OverlayNetwork& network, LikelihoodModel model,
                      NormalizerForm form) {
  double sum = 0.0;
  for (double t : log_likelihood_terms(config, network, model, form)) {
    if (t == kNoMass) return kNoMass;
    sum += t;
  }
  return sum;
}

// ---------------------------------------------------------------------------

void write_configuration(std::ostream& out, const Configuration& config) {
  for (std::size_t node = 0; node < config.node_count(); ++node) {
    out << "place " << node;
    for (int c : config.positions()[node].coords) out << ' ' << c;
    out << '\n';
  }
}

Configuration read_configuration(std::istream& in, const BaseGraph& graph) {
  std::vector<std::optional<LatticePosition>> slots;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string keyword;
    if (!(fields >> keyword) || keyword[0] == '#') continue;
    if (keyword != "place") throw ParseError("expected 'place', got '" + keyword + "'", line_no);
    long long node = -1;
    if (!(fields >> node) || node < 0) throw ParseError("bad node id", line_no);
    LatticePosition pos;
    for (int i = 0; i < graph.dimension(); ++i) {
      int c = 0;
      if (!(fields >> c)) throw ParseError("expected " + std::to_string(graph.dimension()) + " coordinates", line_no);
      pos.coords.push_back(c);
    }
    std::string extra;
    if (fields >> extra) throw ParseError("trailing field '" + extra + "'", line_no);
    if (!graph.contains(pos)) throw ParseError("site " + to_string(pos) + " is outside the lattice", line_no);
    if (static_cast<std::size_t>(node) >= slots.size()) slots.resize(node + 1);
    if (slots[node]) throw ParseError("node " + std::to_string(node) + " placed twice", line_no);
    slots[node] = std::move(pos);
  }
  std::vector<LatticePosition> positions;
  positions.reserve(slots.size());
  for (std::size_t node = 0; node < slots.size(); ++node) {
    if (!slots[node]) throw ParseError("missing placement for node " + std::to_string(node));
    positions.push_back(std::move(*slots[node]));
  }
  try {
    return Configuration(graph, std::move(positions));
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
}

}  // namespace qnet
