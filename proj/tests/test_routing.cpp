#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "qnet/embedding.hpp"
#include "qnet/errors.hpp"
#include "qnet/routing.hpp"
#include "support.hpp"

using namespace qnet;
using namespace qnet::testing;

namespace {

GeneratorSpec pure_lattice(int side) {
  auto spec = lattice_spec(side, {1.0});
  spec.long_links_per_node = 0;
  return spec;
}

Configuration planted(const GeneratorSpec& spec) {
  return Configuration(BaseGraph(spec.dimension, spec.lattice_side), planted_layout(spec));
}

}  // namespace

TEST_CASE("greedy next hop") {
  const std::vector<bool> none(20, false);
  SUBCASE("argmin distance") {
    NeighborReport r{0, {{1, at({5, 0}), 1.0}, {2, at({2, 0}), 1.0}, {3, at({9, 0}), 1.0}}};
    CHECK(greedy_next(0, at({0, 0}), r, none) == NodeId{2});
  }
  SUBCASE("ties go to the smallest id") {
    NeighborReport r{0, {{11, at({3, 0}), 1.0}, {4, at({0, 3}), 1.0}}};
    CHECK(greedy_next(0, at({0, 0}), r, none) == NodeId{4});
  }
  SUBCASE("fidelity tiebreak") {
    NeighborReport r{0, {{4, at({0, 3}), 0.7}, {11, at({3, 0}), 0.95}, {12, at({1, 0}), 0.1}}};
    CHECK(greedy_next(0, at({0, 0}), r, none, RoutingMetric::FidelityTiebreak) == NodeId{12});
    r.neighbors.pop_back();
    CHECK(greedy_next(0, at({0, 0}), r, none, RoutingMetric::FidelityTiebreak) == NodeId{11});
    CHECK(greedy_next(0, at({0, 0}), r, none, RoutingMetric::L1) == NodeId{4});
  }
  SUBCASE("visited contacts are skipped") {
    NeighborReport r{0, {{1, at({1, 0}), 1.0}, {2, at({4, 0}), 1.0}}};
    std::vector<bool> visited(3, false);
    visited[1] = true;
    CHECK(greedy_next(0, at({0, 0}), r, visited) == NodeId{2});
    visited[2] = true;
    CHECK_FALSE(greedy_next(0, at({0, 0}), r, visited).has_value());
  }
}

TEST_CASE("route basics") {
  const OverlayNetwork net(3, {link(0, 1), link(1, 2, 0.5)});
  const auto c = place(2, 4, {at({0, 0}), at({1, 0}), at({2, 0})});
  const LinkRealization real(net, {1, 0}, 0);

  const auto adj = route(real, c, 0, 1, 10);
  CHECK(adj.status == RouteStatus::Delivered);
  CHECK(adj.path == std::vector<NodeId>{0, 1});
  CHECK(adj.hops == 1);

  const auto isolated = route(real, c, 2, 0, 10);
  CHECK(isolated.status == RouteStatus::DeadEnd);
  CHECK(isolated.path == std::vector<NodeId>{2});
  CHECK(isolated.hops == 0);

  const auto stuck = route(real, c, 0, 2, 10);
  CHECK(stuck.status == RouteStatus::DeadEnd);
  CHECK(stuck.path == std::vector<NodeId>{0, 1});

  CHECK_THROWS_AS(route(real, c, 1, 1, 10), DomainError);
  CHECK_THROWS_AS(route(real, c, 0, 7, 10), DomainError);
}

TEST_CASE("hop limit") {
  const auto net = path_network(6);
  const auto c = place(1, 6, {at({0}), at({1}), at({2}), at({3}), at({4}), at({5})});
  const auto real = full_realization(net);
  const auto capped = route(real, c, 0, 5, 3);
  CHECK(capped.status == RouteStatus::HopLimitExceeded);
  CHECK(capped.hops == 3);
  CHECK(route(real, c, 0, 5, 5).status == RouteStatus::Delivered);
  CHECK(default_hop_limit(BaseGraph(2, 64)) == 4 * 144 + 16);
}

TEST_CASE("greedy never revisits a node") {
  // A dead-end pocket: the greedy choice 1 leads only back to 0.
  const OverlayNetwork net(4, {link(0, 1), link(0, 2), link(2, 3)});
  const auto c = place(2, 6, {at({0, 0}), at({3, 0}), at({0, 2}), at({5, 0})});
  const auto out = route(full_realization(net), c, 0, 3, 50);
  CHECK(out.status == RouteStatus::DeadEnd);
  CHECK(out.path == std::vector<NodeId>{0, 1});

  const auto spec = lattice_spec(8, {0.7, 0.6, 0.5}, 4);
  const auto big = generate_overlay(spec);
  const auto cfg = planted(spec);
  Rng rng(2);
  for (int i = 0; i < 300; ++i) {
    const auto s = static_cast<NodeId>(rng.below(64));
    const auto t = static_cast<NodeId>((s + 1 + rng.below(63)) % 64);
    const auto r = route(realize_links(big, rng.next()), cfg, s, t, 200);
    std::set<NodeId> seen(r.path.begin(), r.path.end());
    CHECK(seen.size() == r.path.size());
    if (r.status == RouteStatus::Delivered) {
      CHECK(r.path.back() == t);
      CHECK(r.hops == static_cast<std::int64_t>(r.path.size()) - 1);
    }
  }
}

TEST_CASE("pure lattice routes take exactly the L1 distance") {
  const auto spec = pure_lattice(10);
  const auto net = generate_overlay(spec);
  const auto cfg = planted(spec);
  const auto real = full_realization(net);
  for (NodeId s = 0; s < 100; s += 7) {
    for (NodeId t = 0; t < 100; t += 3) {
      if (s == t) continue;
      const auto r = route(real, cfg, s, t, 1000);
      REQUIRE(r.status == RouteStatus::Delivered);
      CHECK(r.hops == l1_distance(cfg.position(s), cfg.position(t)));
    }
  }
}

TEST_CASE("route ensemble") {
  SUBCASE("single guaranteed link") {
    const OverlayNetwork net(2, {link(0, 1)});
    const auto c = place(2, 2, {at({0, 0}), at({1, 1})});
    EnsembleOptions opt;
    opt.trials = 50;
    const auto s = route_ensemble(net, c, opt);
    CHECK(s.mean_hops == 1.0);
    CHECK(s.delivery_rate == 1.0);
    CHECK(s.hop_histogram.at(1) == 50);
  }
  SUBCASE("full lattice always delivers") {
    const auto spec = pure_lattice(12);
    const auto s = route_ensemble(generate_overlay(spec), planted(spec), {1000, 3});
    CHECK(s.delivery_rate == 1.0);
    CHECK(s.dead_ends == 0);
  }
  SUBCASE("long-range instance stays within the polylog envelope") {
    const auto spec = lattice_spec(32, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0}, 12);
    const auto s = route_ensemble(generate_overlay(spec), planted(spec), {1000, 5});
    CHECK(s.delivery_rate == 1.0);
    CHECK(s.mean_hops >= 1.0);
    CHECK(s.mean_hops <= 300.0);
    CHECK(s.median_hops <= s.p95_hops);
  }
  SUBCASE("nothing delivered") {
    const OverlayNetwork net(2, {link(0, 1, 1e-15)});
    const auto s = route_ensemble(net, place(2, 2, {at({0, 0}), at({1, 1})}), {20, 1});
    CHECK(s.delivery_rate == 0.0);
    CHECK(std::isnan(s.mean_hops));
    CHECK(s.dead_ends == 20);
  }
  SUBCASE("deterministic per seed") {
    const auto spec = lattice_spec(8, {0.8, 0.5, 0.4}, 9);
    const auto net = generate_overlay(spec);
    const auto a = route_ensemble(net, planted(spec), {400, 77});
    const auto b = route_ensemble(net, planted(spec), {400, 77});
    CHECK(a.hop_histogram == b.hop_histogram);
    CHECK(a.dead_ends == b.dead_ends);
    CHECK(a.mean_hops == b.mean_hops);
  }
  SUBCASE("argument checks") {
    const OverlayNetwork net(2, {link(0, 1)});
    const auto c = place(2, 2, {at({0, 0}), at({1, 1})});
    CHECK_THROWS_AS(route_ensemble(net, c, {0, 1}), DomainError);
    EnsembleOptions opt;
    opt.fixed_pair = std::make_pair(NodeId{1}, NodeId{1});
    CHECK_THROWS_AS(route_ensemble(net, c, opt), DomainError);
  }
}

TEST_CASE("ensemble csv") {
  EnsembleSummary s;
  s.trials = 10;
  s.mean_hops = 2.5;
  s.median_hops = 2;
  s.p95_hops = 4;
  s.delivery_rate = 0.9;
  EnsembleOptions opt;
  opt.seed = 42;
  CHECK(ensemble_csv_header() == "side,n,k,trials,seed,mean_hops,median_hops,p95_hops,delivery_rate\n");
  CHECK(ensemble_csv_row(BaseGraph(2, 8), opt, s) == "8,64,2,10,42,2.500000,2.000000,4.000000,0.900000\n");
}
