#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qnet/basegraph.hpp"
#include "qnet/embedding.hpp"
#include "qnet/errors.hpp"
#include "qnet/rng.hpp"
#include "support.hpp"

using namespace qnet;
using namespace qnet::testing;

TEST_CASE("l1 distance") {
  CHECK(l1_distance(at({0, 0}), at({3, 4})) == 7);
  CHECK(l1_distance(at({5, 2}), at({5, 2})) == 0);
  CHECK(l1_distance(at({1, 7}), at({4, 3})) == 7);
  CHECK_THROWS_AS(l1_distance(at({1, 2}), at({1, 2, 3})), DomainError);
}

TEST_CASE("l1 distance is a metric on random triples") {
  Rng rng(5);
  auto random_pos = [&] {
    LatticePosition p;
    for (int i = 0; i < 3; ++i) p.coords.push_back(static_cast<int>(rng.below(50)));
    return p;
  };
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_pos(), b = random_pos(), c = random_pos();
    CHECK(l1_distance(a, b) == l1_distance(b, a));
    CHECK(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c));
    CHECK((l1_distance(a, b) == 0) == (a == b));
  }
}

TEST_CASE("base graph site indexing") {
  const BaseGraph g(3, 4);
  CHECK(g.site_count() == 64);
  CHECK(g.max_distance() == 9);
  for (std::int64_t i = 0; i < g.site_count(); ++i) CHECK(g.site_index(g.site(i)) == i);
  CHECK(g.site(1) == at({0, 0, 1}));
  CHECK_FALSE(g.contains(at({0, 4, 0})));
  CHECK_THROWS_AS(BaseGraph(2, 1), DomainError);
}

TEST_CASE("configurations are injective and on-lattice") {
  CHECK_THROWS_AS(place(2, 4, {at({0, 0}), at({0, 0})}), DomainError);
  CHECK_THROWS_AS(place(2, 4, {at({0, 4})}), DomainError);
  auto c = place(2, 4, {at({0, 0}), at({3, 3}), at({1, 2})});
  c.swap_positions(0, 1);
  CHECK(c.position(0) == at({3, 3}));
  CHECK(c.position(1) == at({0, 0}));
  CHECK(c.position(2) == at({1, 2}));
  CHECK_THROWS_AS(c.position(3), DomainError);
}

TEST_CASE("normalizer") {
  SUBCASE("one contact at distance 1, k=2") {
    const OverlayNetwork net(2, {link(0, 1)});
    CHECK(normalizer(place(2, 4, {at({0, 0}), at({0, 1})}), net, 0) == doctest::Approx(1.0));
  }
  SUBCASE("contacts at distances 1, 2, 4, k=2") {
    const OverlayNetwork net(4, {link(0, 1), link(0, 2, 1.0, 2), link(0, 3, 1.0, 3)});
    const auto c = place(2, 8, {at({0, 0}), at({0, 1}), at({2, 0}), at({1, 3})});
    CHECK(normalizer(c, net, 0) == doctest::Approx(1.0 + 0.25 + 0.0625));
    CHECK(normalizer(c, net, 0, NormalizerForm::Literal) == doctest::Approx(7.0));
  }
  SUBCASE("one contact at distance 2, k=1") {
    const OverlayNetwork net(2, {link(0, 1)});
    CHECK(normalizer(place(1, 4, {at({0}), at({2})}), net, 0) == doctest::Approx(0.5));
  }
  SUBCASE("isolated node") {
    const OverlayNetwork net(3, {link(0, 1)});
    CHECK_THROWS_AS(normalizer(place(1, 4, {at({0}), at({1}), at({2})}), net, 2), DomainError);
  }
}

TEST_CASE("correction constant and connection probability") {
  SUBCASE("exact cancellation") {
    const OverlayNetwork net(2, {link(0, 1, 1.0)});
    const auto c = place(2, 4, {at({0, 0}), at({1, 0})});
    CHECK(correction_constant(c, net, 0) == doctest::Approx(0.0));
    CHECK(connection_probability(c, net, 0) == doctest::Approx(1.0));
  }
  SUBCASE("negative correction") {
    // H = 1 + 1/4, so the structural term of the d=1 link is 0.8.
    const OverlayNetwork net(3, {link(0, 1, 0.5), link(0, 2, 0.5, 2)});
    const auto c = place(2, 4, {at({0, 0}), at({0, 1}), at({2, 0})});
    CHECK(structural_probability(c, net, 0) == doctest::Approx(0.8));
    CHECK(correction_constant(c, net, 0) == doctest::Approx(-0.3));
    CHECK(connection_probability(c, net, 0) == doctest::Approx(0.5));
  }
  SUBCASE("structural term alone") {
    const OverlayNetwork net(4, {link(0, 1), link(0, 2, 0.25, 2), link(0, 3, 1.0, 3)});
    const auto c = place(2, 8, {at({0, 0}), at({1, 0}), at({0, 2}), at({4, 0})});
    CHECK(structural_probability(c, net, 1) == doctest::Approx(0.25 / 1.3125).epsilon(1e-12));
    CHECK(connection_probability(c, net, 1) == doctest::Approx(0.25));
  }
}

TEST_CASE("probability preservation holds for every link and placement") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    GeneratorSpec spec = lattice_spec(6, {0.9, 0.6, 0.3}, trial);
    const auto net = generate_overlay(spec);
    const BaseGraph g(2, 6);
    const auto c = random_configuration(g, default_occupied_sites(g, net.node_count()), rng.next());
    for (std::size_t i = 0; i < net.links().size(); ++i) {
      CHECK(std::abs(connection_probability(c, net, i) - net.link(i).probability) < 1e-12);
      CHECK(std::abs(connection_probability(c, net, i, NormalizerForm::Literal) - net.link(i).probability) < 1e-12);
    }
  }
}

TEST_CASE("level distance") {
  CHECK(level_distance(1) == 1);
  CHECK(level_distance(2) == 2);
  CHECK(level_distance(4) == 8);
  CHECK_THROWS_AS(level_distance(0), DomainError);
}

TEST_CASE("log likelihood") {
  SUBCASE("empty link set") {
    const OverlayNetwork net(2, {});
    const auto c = place(2, 4, {at({0, 0}), at({1, 1})});
    CHECK(log_likelihood(c, net, LikelihoodModel::Corrected) == 0.0);
    CHECK(log_likelihood(c, net, LikelihoodModel::Structural) == 0.0);
  }
  SUBCASE("single factor 0.25") {
    const OverlayNetwork net(2, {link(0, 1, 0.25)});
    const auto c = place(2, 4, {at({0, 0}), at({2, 1})});
    CHECK(log_likelihood(c, net, LikelihoodModel::Corrected) == doctest::Approx(-1.386294).epsilon(1e-6));
  }
  SUBCASE("factors 0.5 and 0.2") {
    const OverlayNetwork net(3, {link(0, 1, 0.5), link(1, 2, 0.2)});
    const auto c = place(2, 4, {at({0, 0}), at({2, 1}), at({3, 3})});
    CHECK(log_likelihood(c, net, LikelihoodModel::Corrected) == doctest::Approx(-2.302585).epsilon(1e-6));
  }
  SUBCASE("structural and kernel forms") {
    // Node 0 has contacts at d=1 and d=2: H = 1.25, terms ln(1/1.25), ln(0.25/1.25).
    const OverlayNetwork net(3, {link(0, 1), link(0, 2)});
    const auto c = place(2, 4, {at({0, 0}), at({0, 1}), at({2, 0})});
    CHECK(log_likelihood(c, net, LikelihoodModel::Structural) ==
          doctest::Approx(std::log(0.8) + std::log(0.2)));
    CHECK(log_likelihood(c, net, LikelihoodModel::Kernel) == doctest::Approx(-2.0 * std::log(2.0)));
  }
}

TEST_CASE("kernel and corrected likelihoods are local to the swapped pair") {
  Rng rng(8);
  const auto net = generate_overlay(lattice_spec(5, {1.0, 0.7, 0.4}, 9));
  const BaseGraph g(2, 5);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = random_configuration(g, default_occupied_sites(g, net.node_count()), rng.next());
    const auto x = static_cast<NodeId>(rng.below(net.node_count()));
    auto y = static_cast<NodeId>(rng.below(net.node_count() - 1));
    if (y >= x) ++y;
    for (auto model : {LikelihoodModel::Kernel, LikelihoodModel::Corrected}) {
      const auto before = log_likelihood_terms(c, net, model);
      auto swapped = c;
      swapped.swap_positions(x, y);
      const auto after = log_likelihood_terms(swapped, net, model);
      for (std::size_t i = 0; i < net.links().size(); ++i) {
        const auto& e = net.link(i);
        const bool incident = e.endpoint_a == x || e.endpoint_b == x || e.endpoint_a == y || e.endpoint_b == y;
        if (!incident) CHECK(before[i] == after[i]);
      }
    }
  }
}

TEST_CASE("normalizer shrinks when a contact moves away") {
  const OverlayNetwork net(3, {link(0, 1), link(0, 2)});
  double previous = std::numeric_limits<double>::infinity();
  for (int x = 1; x < 10; ++x) {
    const auto c = place(2, 10, {at({0, 0}), at({0, 1}), at({x, 0})});
    const double h = normalizer(c, net, 0);
    CHECK(h > 0.0);
    CHECK(h <= previous);
    previous = h;
  }
}

TEST_CASE("configuration serialization") {
  const auto c = place(2, 5, {at({0, 0}), at({4, 1}), at({2, 3})});
  std::ostringstream out;
  write_configuration(out, c);
  CHECK(out.str() == "place 0 0 0\nplace 1 4 1\nplace 2 2 3\n");
  std::istringstream in("place 2 2 3\nplace 0 0 0\nplace 1 4 1\n");
  CHECK(read_configuration(in, BaseGraph(2, 5)) == c);

  std::istringstream gap("place 0 0 0\nplace 2 1 1\n");
  try {
    read_configuration(gap, BaseGraph(2, 5));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("node 1") != std::string::npos);
  }
  std::istringstream shared("place 0 1 1\nplace 1 1 1\n");
  CHECK_THROWS_AS(read_configuration(shared, BaseGraph(2, 5)), ParseError);
  std::istringstream off("place 0 9 1\n");
  CHECK_THROWS_AS(read_configuration(off, BaseGraph(2, 5)), ParseError);
}
