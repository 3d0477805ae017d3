#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "qnet/commands.hpp"
#include "qnet/embedding.hpp"
#include "qnet/rng.hpp"
#include "support.hpp"

using namespace qnet;
using namespace qnet::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("qnet-cli-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "qnet-sim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* kSmallConfig = R"(seed = 11

[lattice]
side = 8
dimension = 2

[generator]
level_probabilities = 1.0 0.8 0.6 0.4

[chain]
steps = 3000
checkpoints = 6

[routing]
trials = 200

[analysis]
gamma = 0.8
m = 2
K = 1.5
Z = 0.75
sizes = 8 16
scaling_trials = 50
)";

}  // namespace

TEST_CASE("generate a two-node network") {
  TempDir dir;
  write(dir / "c.ini", "seed = 1\n[lattice]\nside = 2\n[generator]\nnode_count = 2\nmin_degree = 1\n");
  const auto r = run({"generate", "--config", (dir / "c.ini").string(), "--out", (dir / "o").string()});
  CHECK(r.code == 0);
  CHECK(slurp(dir / "o" / "network.txt") == "nodes 2 generation doubling\nlink 0 1 level 1 prob 1 fidelity 1\n");
  CHECK(slurp(dir / "o" / "planted.txt") == "place 0 0 0\nplace 1 0 1\n");
}

TEST_CASE("every command is byte-identical across reruns") {
  TempDir dir;
  write(dir / "c.ini", kSmallConfig);
  const auto cfg = (dir / "c.ini").string();
  for (const char* out : {"a", "b"}) {
    const auto o = (dir / out).string();
    REQUIRE(run({"generate", "--config", cfg, "--out", o}).code == 0);
    REQUIRE(run({"embed", "--config", cfg, "--out", o, "--network", o + "/network.txt"}).code == 0);
    REQUIRE(run({"route", "--config", cfg, "--out", o, "--network", o + "/network.txt", "--placement",
                 o + "/placement.txt"})
                .code == 0);
    REQUIRE(run({"analyze", "--config", cfg, "--out", o, "--network", o + "/network.txt", "--placement",
                 o + "/placement.txt"})
                .code == 0);
  }
  for (const char* file : {"network.txt", "planted.txt", "placement.txt", "chain.csv", "routes.csv",
                           "tessellation.csv", "scaling.csv", "summary.json"}) {
    INFO(file);
    const auto a = slurp(dir / "a" / file);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(dir / "b" / file));
  }

  // A different seed moves the outputs.
  const auto o = (dir / "c").string();
  REQUIRE(run({"generate", "--config", cfg, "--out", o, "--seed", "12"}).code == 0);
  CHECK(slurp(dir / "c" / "network.txt") != slurp(dir / "a" / "network.txt"));

  const auto chain = slurp(dir / "a" / "chain.csv");
  CHECK(chain.rfind("step,loglik,acceptance_rate\n0,", 0) == 0);
  std::istringstream rows(chain);
  std::string line, first, last;
  std::getline(rows, line);
  int count = 0;
  while (std::getline(rows, line)) {
    if (first.empty()) first = line;
    last = line;
    ++count;
  }
  CHECK(count == 7);
  auto loglik = [](const std::string& row) {
    const auto a = row.find(','), b = row.rfind(',');
    return std::stod(row.substr(a + 1, b - a - 1));
  };
  CHECK(loglik(last) >= loglik(first));

  const auto routes = slurp(dir / "a" / "routes.csv");
  CHECK(routes.rfind("side,n,k,trials,seed,mean_hops,median_hops,p95_hops,delivery_rate\n8,64,2,200,11,", 0) == 0);

  const auto summary = slurp(dir / "a" / "summary.json");
  CHECK(summary.find("\"K\": 1.5") != std::string::npos);
  CHECK(summary.find("\"Z\": 0.75") != std::string::npos);
  const auto scaling = slurp(dir / "a" / "scaling.csv");
  CHECK(std::count(scaling.begin(), scaling.end(), '\n') == 3);
}

TEST_CASE("embed with zero steps keeps the seeded start") {
  TempDir dir;
  write(dir / "c.ini", "seed = 5\n[lattice]\nside = 4\n[generator]\nlevel_probabilities = 1 0.5\n[chain]\nsteps = 0\n");
  const auto o = (dir / "o").string();
  REQUIRE(run({"generate", "--config", (dir / "c.ini").string(), "--out", o}).code == 0);
  REQUIRE(run({"embed", "--config", (dir / "c.ini").string(), "--out", o, "--network", o + "/network.txt"}).code == 0);
  const BaseGraph g(2, 4);
  const auto expected = random_configuration(g, default_occupied_sites(g, 16), derive_seed(5, "embed.init"));
  std::ostringstream text;
  write_configuration(text, expected);
  CHECK(slurp(dir / "o" / "placement.txt") == text.str());
}

TEST_CASE("route on a guaranteed link") {
  TempDir dir;
  write(dir / "c.ini", "seed = 3\n[lattice]\nside = 2\n[routing]\ntrials = 1\nsource = 0\ntarget = 1\n");
  write(dir / "n.txt", "nodes 2 generation doubling\nlink 0 1 level 1 prob 1 fidelity 1\n");
  write(dir / "p.txt", "place 0 0 0\nplace 1 0 1\n");
  const auto r = run({"route", "--config", (dir / "c.ini").string(), "--out", (dir / "o").string(), "--network",
                      (dir / "n.txt").string(), "--placement", (dir / "p.txt").string()});
  CHECK(r.code == 0);
  CHECK(slurp(dir / "o" / "routes.csv") ==
        "side,n,k,trials,seed,mean_hops,median_hops,p95_hops,delivery_rate\n"
        "2,4,2,1,3,1.000000,1.000000,1.000000,1.000000\n");
}

TEST_CASE("analyze a complete tiny instance") {
  TempDir dir;
  write(dir / "c.ini", "seed = 3\n[lattice]\nside = 4\n[analysis]\nm = 1\nsizes =\n");
  std::string net = "nodes 16 generation doubling\n";
  for (int a = 0; a < 16; ++a)
    for (int b = a + 1; b < 16; ++b) net += "link " + std::to_string(a) + " " + std::to_string(b) + " level 1 prob 1 fidelity 1\n";
  write(dir / "n.txt", net);
  std::string place;
  for (int i = 0; i < 16; ++i) place += "place " + std::to_string(i) + " " + std::to_string(i / 4) + " " + std::to_string(i % 4) + "\n";
  write(dir / "p.txt", place);
  const auto r = run({"analyze", "--config", (dir / "c.ini").string(), "--out", (dir / "o").string(), "--network",
                      (dir / "n.txt").string(), "--placement", (dir / "p.txt").string()});
  CHECK(r.code == 0);
  const auto summary = slurp(dir / "o" / "summary.json");
  CHECK(summary.find("\"bound_holds\": true") != std::string::npos);
  CHECK(summary.find("\"K\": 1.0") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "o" / "scaling.csv"));
}

TEST_CASE("error exits") {
  TempDir dir;
  const auto o = (dir / "o").string();
  SUBCASE("capacity") {
    write(dir / "c.ini", "[lattice]\nside = 2\n[generator]\nnode_count = 5\n");
    const auto r = run({"generate", "--config", (dir / "c.ini").string(), "--out", o});
    CHECK(r.code == 2);
    CHECK(r.err.find("capacity") != std::string::npos);
  }
  SUBCASE("unknown key") {
    write(dir / "c.ini", "[chain]\nstepz = 4\n");
    const auto r = run({"generate", "--config", (dir / "c.ini").string(), "--out", o});
    CHECK(r.code == 2);
    CHECK(r.err.find("chain.stepz") != std::string::npos);
  }
  SUBCASE("out of range") {
    write(dir / "c.ini", "[analysis]\ngamma = 0.3\n");
    const auto r = run({"generate", "--config", (dir / "c.ini").string(), "--out", o});
    CHECK(r.code == 2);
    CHECK(r.err.find("analysis.gamma") != std::string::npos);
  }
  SUBCASE("malformed link line") {
    write(dir / "c.ini", "[lattice]\nside = 4\n");
    write(dir / "n.txt", "nodes 3 generation doubling\nlink 0 1 level 1 prob 1 fidelity 1\nlink 1 x level 1\n");
    const auto r = run({"embed", "--config", (dir / "c.ini").string(), "--out", o, "--network",
                        (dir / "n.txt").string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("line 3") != std::string::npos);
  }
  SUBCASE("missing placement") {
    write(dir / "c.ini", "[lattice]\nside = 4\n");
    write(dir / "n.txt", "nodes 3 generation doubling\nlink 0 1 level 1 prob 1 fidelity 1\n");
    write(dir / "p.txt", "place 0 0 0\nplace 1 0 1\n");
    const auto r = run({"route", "--config", (dir / "c.ini").string(), "--out", o, "--network",
                        (dir / "n.txt").string(), "--placement", (dir / "p.txt").string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("missing placement for node 2") != std::string::npos);
  }
  SUBCASE("missing config file") {
    const auto r = run({"generate", "--config", (dir / "nope.ini").string()});
    CHECK(r.code == 2);
  }
  SUBCASE("no subcommand") { CHECK(run({}).code == 2); }
}

TEST_CASE("config values may carry trailing comments") {
  std::istringstream in("seed = 4 ; top\n[generator]\ngeneration = nextgen   # third generation\n"
                        "level_probabilities = 1 0.5 # two levels\n[routing]\nmetric = fidelity\n");
  const auto c = parse_config(in);
  CHECK(c.seed == 4);
  CHECK(c.generator.generation == RepeaterGeneration::NextGeneration);
  CHECK(c.generator.level_probabilities == std::vector<double>{1.0, 0.5});
  CHECK(c.routing.metric == RoutingMetric::FidelityTiebreak);
}
