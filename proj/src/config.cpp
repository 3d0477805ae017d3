#include "qnet/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"", {"seed", "output_dir"}},
      {"lattice", {"side", "dimension"}},
      {"generator",
       {"node_count", "level_probabilities", "level_weights", "level_fidelities", "long_links_per_node", "min_degree",
        "generation"}},
      {"basegraph", {"normalizer"}},
      {"chain", {"steps", "burn_in", "stride", "checkpoints"}},
      {"routing", {"trials", "hop_limit", "metric", "source", "target"}},
      {"analysis", {"gamma", "m", "K", "Z", "sizes", "scaling_trials", "scaling_placement", "scaling_chain_steps"}},
      {"input", {"network", "placement"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw ConfigError(key + ": cannot parse '" + text + "' as a number");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
  std::vector<T> values;
  std::istringstream fields(raw);
  std::string token;
  while (fields >> token) {
    if (token.back() == ',') token.pop_back();
    if (!token.empty()) values.push_back(parse_number<T>(key, token));
  }
  return values;
}

// Drops a trailing `# ...` or `; ...` comment; the marker must follow whitespace.
std::string strip_comment(const std::string& value) {
  for (std::size_t i = 1; i < value.size(); ++i) {
    if ((value[i] == '#' || value[i] == ';') && std::isspace(static_cast<unsigned char>(value[i - 1]))) {
      return value.substr(0, i);
    }
  }
  return value;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const pt::ptree* node = &tree_;
    if (!section.empty()) {
      auto child = tree_.get_child_optional(section);
      if (!child) return std::nullopt;
      node = &*child;
    }
    if (auto v = node->get_optional<std::string>(key)) return trim(strip_comment(*v));
    return std::nullopt;
  }

  template <typename T>
  void number(const std::string& section, const std::string& key, T& target) const {
    if (auto v = raw(section, key)) target = parse_number<T>(name(section, key), *v);
  }

  template <typename T>
  void list(const std::string& section, const std::string& key, std::vector<T>& target) const {
    if (auto v = raw(section, key)) target = parse_list<T>(name(section, key), *v);
  }

  static std::string name(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
  }

 private:
  const pt::ptree& tree_;
};

void reject_unknown_keys(const pt::ptree& tree) {
  const auto& keys = known_keys();
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      if (!keys.at("").count(name)) throw ConfigError(name + ": unknown key");
      continue;
    }
    auto section = keys.find(name);
    if (section == keys.end() || name.empty()) throw ConfigError("[" + name + "]: unknown section");
    for (const auto& [key, value] : node) {
      if (!section->second.count(key)) throw ConfigError(name + "." + key + ": unknown key");
    }
  }
}

void require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) throw ConfigError(key + ": " + why);
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  reject_unknown_keys(tree);
  const Reader r(tree);
  ExperimentConfig c;

  r.number("", "seed", c.seed);
  if (auto v = r.raw("", "output_dir")) c.output_dir = *v;

  auto& g = c.generator;
  r.number("lattice", "side", g.lattice_side);
  r.number("lattice", "dimension", g.dimension);
  r.number("generator", "node_count", g.node_count);
  r.list("generator", "level_probabilities", g.level_probabilities);
  r.list("generator", "level_weights", g.level_weights);
  r.list("generator", "level_fidelities", g.level_fidelities);
  r.number("generator", "long_links_per_node", g.long_links_per_node);
  r.number("generator", "min_degree", g.min_degree);
  if (auto v = r.raw("generator", "generation")) {
    require(*v == "doubling" || *v == "nextgen", "generator.generation", "expected doubling or nextgen");
    g.generation = *v == "doubling" ? RepeaterGeneration::Doubling : RepeaterGeneration::NextGeneration;
  }
  validate(g);

  if (auto v = r.raw("basegraph", "normalizer")) {
    require(*v == "inverse_power" || *v == "literal", "basegraph.normalizer", "expected inverse_power or literal");
    c.normalizer = *v == "literal" ? NormalizerForm::Literal : NormalizerForm::InversePower;
  }

  r.number("chain", "steps", c.chain.steps);
  r.number("chain", "burn_in", c.chain.burn_in);
  r.number("chain", "stride", c.chain.stride);
  r.number("chain", "checkpoints", c.chain.checkpoints);
  require(c.chain.burn_in >= 0.0 && c.chain.burn_in < 1.0, "chain.burn_in", "must lie in [0, 1)");
  require(c.chain.checkpoints >= 1, "chain.checkpoints", "must be >= 1");

  r.number("routing", "trials", c.routing.trials);
  r.number("routing", "hop_limit", c.routing.hop_limit);
  require(c.routing.trials >= 1, "routing.trials", "must be >= 1");
  require(c.routing.hop_limit >= 0, "routing.hop_limit", "must be >= 0 (0 selects the default)");
  if (auto v = r.raw("routing", "metric")) {
    require(*v == "l1" || *v == "fidelity", "routing.metric", "expected l1 or fidelity");
    c.routing.metric = *v == "l1" ? RoutingMetric::L1 : RoutingMetric::FidelityTiebreak;
  }
  long long source = -1, target = -1;
  r.number("routing", "source", source);
  r.number("routing", "target", target);
  if (source >= 0 || target >= 0) {
    require(source >= 0 && target >= 0, "routing.source", "source and target must be given together");
    require(source != target, "routing.target", "must differ from routing.source");
    const auto nodes = static_cast<long long>(g.effective_node_count());
    require(source < nodes, "routing.source", "exceeds node count");
    require(target < nodes, "routing.target", "exceeds node count");
    c.routing.fixed_pair = std::make_pair(static_cast<NodeId>(source), static_cast<NodeId>(target));
  }

  auto& a = c.analysis;
  r.number("analysis", "gamma", a.gamma);
  r.number("analysis", "m", a.levels_m);
  r.number("analysis", "K", a.K);
  r.number("analysis", "Z", a.Z);
  r.list("analysis", "sizes", a.sizes);
  r.number("analysis", "scaling_trials", a.scaling_trials);
  r.number("analysis", "scaling_chain_steps", a.scaling_chain_steps);
  if (auto v = r.raw("analysis", "scaling_placement")) {
    require(*v == "planted" || *v == "embedded", "analysis.scaling_placement", "expected planted or embedded");
    a.scaling_placement = *v == "planted" ? ScalingPlacement::Planted : ScalingPlacement::Embedded;
  }
  require(a.gamma > g.dimension / 4.0 && a.gamma < 1.0, "analysis.gamma", "must lie in (k/4, 1)");
  require(a.levels_m >= 1, "analysis.m", "must be >= 1");
  require(a.K > 0.0, "analysis.K", "must be positive");
  require(a.Z > 0.0, "analysis.Z", "must be positive");
  require(a.scaling_trials >= 1, "analysis.scaling_trials", "must be >= 1");
  for (std::size_t i = 0; i < a.sizes.size(); ++i) {
    const int s = a.sizes[i];
    require(s >= 2 && (s & (s - 1)) == 0, "analysis.sizes", "each side must be a power of two >= 2");
    require(s <= 1024, "analysis.sizes", "sides above 1024 are not supported");
    require(i == 0 || s > a.sizes[i - 1], "analysis.sizes", "must be strictly ascending");
  }

  if (auto v = r.raw("input", "network")) c.network_file = *v;
  if (auto v = r.raw("input", "placement")) c.placement_file = *v;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

}  // namespace qnet
