#include "qnet/commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "qnet/analysis.hpp"
#include "qnet/embedding.hpp"
#include "qnet/errors.hpp"
#include "qnet/rng.hpp"

namespace qnet {

namespace fs = std::filesystem;

namespace {

OverlayNetwork load_network(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file " + path.string());
  try {
    return read_network(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Configuration load_placement(const fs::path& path, const BaseGraph& graph, const OverlayNetwork& network) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open placement file " + path.string());
  auto config = [&] {
    try {
      return read_configuration(in, graph);
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  }();
  if (config.node_count() < network.node_count()) {
    throw ParseError(path.string() + ": missing placement for node " + std::to_string(config.node_count()));
  }
  if (config.node_count() > network.node_count()) {
    throw ParseError(path.string() + ": placement for unknown node " + std::to_string(network.node_count()));
  }
  return config;
}

void check_fits(const OverlayNetwork& network, const BaseGraph& graph) {
  if (static_cast<std::int64_t>(network.node_count()) > graph.site_count()) {
    throw ConfigError("lattice.side: " + std::to_string(network.node_count()) + " nodes exceed lattice capacity " +
                      std::to_string(graph.site_count()));
  }
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string csv_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void cmd_generate(const ExperimentConfig& config, const fs::path& out_dir, std::ostream& log) {
  GeneratorSpec spec = config.generator;
  spec.seed = derive_seed(config.seed, "generate");
  const auto network = generate_overlay(spec);
  const Configuration planted(config.base_graph(), planted_layout(spec));

  fs::create_directories(out_dir);
  std::ostringstream net, place;
  write_network(net, network);
  write_configuration(place, planted);
  write_file(out_dir / "network.txt", net.str());
  write_file(out_dir / "planted.txt", place.str());
  log << "nodes " << network.node_count() << " links " << network.links().size() << '\n';
}

void cmd_embed(const ExperimentConfig& config, const fs::path& network_file, const fs::path& out_dir,
               std::ostream& log) {
  const auto network = load_network(network_file);
  const auto graph = config.base_graph();
  check_fits(network, graph);

  auto initial = random_configuration(graph, default_occupied_sites(graph, network.node_count()),
                                      derive_seed(config.seed, "embed.init"));
  SwapChain chain(network, std::move(initial), derive_seed(config.seed, "embed.chain"));

  std::string trace = "step,loglik,acceptance_rate\n";
  auto checkpoint = [&] {
    const double rate = chain.proposed_swaps()
                            ? static_cast<double>(chain.accepted_swaps()) / static_cast<double>(chain.proposed_swaps())
                            : 0.0;
    trace += std::to_string(chain.step_count()) + "," +
             csv_real(log_likelihood(chain.config(), network, LikelihoodModel::Kernel, config.normalizer)) + "," +
             csv_real(rate) + "\n";
  };
  const std::uint64_t every = std::max<std::uint64_t>(1, config.chain.steps / config.chain.checkpoints);
  checkpoint();
  for (std::uint64_t t = 1; t <= config.chain.steps; ++t) {
    chain.step();
    if (t % every == 0 || t == config.chain.steps) checkpoint();
  }

  fs::create_directories(out_dir);
  std::ostringstream place;
  write_configuration(place, chain.config());
  write_file(out_dir / "placement.txt", place.str());
  write_file(out_dir / "chain.csv", trace);
  log << "steps " << chain.step_count() << " accepted " << chain.accepted_swaps() << " proposed "
      << chain.proposed_swaps() << '\n';
}

void cmd_route(const ExperimentConfig& config, const fs::path& network_file, const fs::path& placement_file,
               const fs::path& out_dir, std::ostream& log) {
  const auto network = load_network(network_file);
  const auto graph = config.base_graph();
  const auto placement = load_placement(placement_file, graph, network);
  if (config.routing.fixed_pair && std::max(config.routing.fixed_pair->first, config.routing.fixed_pair->second) >=
                                       network.node_count()) {
    throw ConfigError("routing.source: fixed pair references a node outside the network");
  }

  EnsembleOptions options;
  options.trials = config.routing.trials;
  options.seed = config.seed;
  options.hop_limit = config.routing.hop_limit;
  options.metric = config.routing.metric;
  options.fixed_pair = config.routing.fixed_pair;
  const auto summary = route_ensemble(network, placement, options);

  fs::create_directories(out_dir);
  write_file(out_dir / "routes.csv", ensemble_csv_header() + ensemble_csv_row(graph, options, summary));
  log << "delivered " << summary.delivered << "/" << summary.trials << " mean_hops " << csv_real(summary.mean_hops)
      << '\n';
}

void cmd_analyze(const ExperimentConfig& config, const fs::path& network_file, const fs::path& placement_file,
                 const fs::path& out_dir, std::ostream& log) {
  const auto network = load_network(network_file);
  const auto graph = config.base_graph();
  const auto placement = load_placement(placement_file, graph, network);
  const auto& a = config.analysis;

  const auto realization = realize_links(network, derive_seed(config.seed, "analyze.realization"));
  const auto diameter =
      measured_diameter(realization, placement, {.seed = derive_seed(config.seed, "analyze.diameter")});

  nlohmann::json summary;
  summary["seed"] = config.seed;
  summary["K"] = a.K;
  summary["Z"] = a.Z;
  summary["gamma"] = a.gamma;
  summary["lattice"] = {{"side", graph.side()}, {"dimension", graph.dimension()}, {"sites", graph.site_count()}};
  summary["diameter"] = {{"value", diameter.diameter},
                         {"exact", diameter.exact},
                         {"component_size", diameter.component_size},
                         {"coverage", diameter.coverage},
                         {"sources", diameter.sources}};

  const double n_side = graph.side();
  nlohmann::json analytic;
  try {
    analytic["m"] = analytic_m(n_side, a.gamma, graph.dimension(), a.K);
    analytic["gamma_pow_m"] = analytic_gamma_pow_m(n_side, a.gamma, graph.dimension(), a.K);
  } catch (const DomainError& e) {
    analytic["m"] = nullptr;
    analytic["note"] = e.what();
  }
  const auto conjunction = conjunction_probability_bound(n_side, a.gamma, graph.dimension(), a.levels_m, a.Z);
  analytic["conjunction_event_bound"] = finite_or_null(conjunction.value);
  analytic["conjunction_event_bound_saturated"] = conjunction.saturated;
  summary["analytic"] = analytic;

  fs::create_directories(out_dir);
  if (graph.dimension() == 2) {
    const auto report = tessellate_and_check(realization, placement, a.gamma, a.levels_m, a.Z);
    write_file(out_dir / "tessellation.csv", tessellation_csv(report));
    summary["tessellation"] = {{"levels_requested", report.levels_requested},
                               {"levels_m", report.levels_m},
                               {"clamped", report.clamped},
                               {"events_violated", report.events_violated},
                               {"all_events_violated", report.all_events_violated},
                               {"bound_value", report.bound_value},
                               {"measured_diameter", report.measured_diameter},
                               {"bound_holds", report.bound_holds},
                               {"max_subsquare_diameter", report.max_subsquare_diameter},
                               {"subsquare_vacuous", report.subsquare_vacuous},
                               {"subsquare_bound", report.subsquare_bound},
                               {"subsquare_bound_holds", report.subsquare_bound_holds}};
  } else {
    summary["tessellation"] = nullptr;
  }

  if (!a.sizes.empty()) {
    ScalingOptions scaling;
    scaling.sides = a.sizes;
    scaling.trials = a.scaling_trials;
    scaling.generator = config.generator;
    scaling.placement = a.scaling_placement;
    scaling.chain_steps = a.scaling_chain_steps;
    scaling.metric = config.routing.metric;
    scaling.hop_limit = config.routing.hop_limit;
    scaling.seed = derive_seed(config.seed, "analyze.scaling");
    const auto report = scaling_experiment(scaling);
    write_file(out_dir / "scaling.csv", scaling_csv(report));
    summary["scaling"] = {{"rows", report.rows.size()},
                          {"max_ratio", finite_or_null(report.max_ratio())},
                          {"min_ratio", finite_or_null(report.min_ratio())}};
  }

  write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  log << "diameter " << diameter.diameter << '\n';
}

// ---------------------------------------------------------------------------

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entangled overlay network embedding and greedy routing simulator", "qnet-sim"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir, network_path, placement_path;
  auto add_common = [&](CLI::App* sub, bool network, bool placement) {
    sub->add_option("--config", config_path, "Experiment config file")->required();
    sub->add_option("--seed", seed, "Top-level seed (overrides the config)");
    sub->add_option("--out", out_dir, "Output directory");
    if (network) sub->add_option("--network", network_path, "Network file (default: [input] network)");
    if (placement) sub->add_option("--placement", placement_path, "Placement file (default: [input] placement)");
  };
  auto* generate = app.add_subcommand("generate", "Generate a synthetic overlay network");
  auto* embed = app.add_subcommand("embed", "Embed a network onto the lattice with the swap chain");
  auto* route = app.add_subcommand("route", "Run a greedy routing ensemble");
  auto* analyze = app.add_subcommand("analyze", "Diameter, tessellation and scaling reports");
  add_common(generate, false, false);
  add_common(embed, true, false);
  add_common(route, true, true);
  add_common(analyze, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    auto config = load_config(config_path);
    if (seed) config.seed = *seed;
    const fs::path out_path = !out_dir.empty() ? fs::path(out_dir) : config.output_dir.value_or(".");
    auto input = [&](const std::string& flag, const std::optional<fs::path>& fallback, const char* what) {
      if (!flag.empty()) return fs::path(flag);
      if (fallback) return *fallback;
      throw ConfigError(std::string("input.") + what + ": no file given (use --" + what + ")");
    };

    if (generate->parsed()) {
      cmd_generate(config, out_path, out);
    } else if (embed->parsed()) {
      cmd_embed(config, input(network_path, config.network_file, "network"), out_path, out);
    } else if (route->parsed()) {
      cmd_route(config, input(network_path, config.network_file, "network"),
                input(placement_path, config.placement_file, "placement"), out_path, out);
    } else {
      cmd_analyze(config, input(network_path, config.network_file, "network"),
                  input(placement_path, config.placement_file, "placement"), out_path, out);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const SizeError& e) {
    err << "size limit: " << e.what() << '\n';
    return kExitGuard;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitGuard;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace qnet
