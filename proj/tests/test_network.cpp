#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "taxlearn/errors.hpp"
#include "taxlearn/network.hpp"
#include "taxlearn/validation.hpp"

using namespace taxlearn;
using namespace taxlearn::net;
using Catch::Approx;

namespace {

Network parallel() { return Network(2, {{0, 1}, {0, 1}}); }

// s=0, a=1, b=2, t=3; edges s→a, a→t, s→b, b→t.
Network diamond() { return Network(4, {{0, 1}, {1, 3}, {0, 2}, {2, 3}}); }

double enumerated_min(const Network& g, std::span<const double> w, int s, int t, int must = -1,
                      int avoid = -1) {
  double best = kInfinity;
  for (const Path& p : enumerate_simple_paths(g, s, t)) {
    if (must >= 0 && std::find(p.begin(), p.end(), must) == p.end()) continue;
    if (avoid >= 0 && std::find(p.begin(), p.end(), avoid) != p.end()) continue;
    double len = 0.0;
    for (int e : p) len += w[static_cast<std::size_t>(e)];
    best = std::min(best, len);
  }
  return best;
}

Network random_dag_like(std::mt19937_64& rng, int vertices) {
  std::vector<Edge> edges;
  std::bernoulli_distribution coin(0.45);
  for (int u = 0; u < vertices; ++u) {
    for (int v = 0; v < vertices; ++v) {
      if (u != v && coin(rng)) edges.push_back({u, v});
    }
  }
  if (edges.empty()) edges.push_back({0, vertices - 1});
  return Network(vertices, edges);
}

}  // namespace

TEST_CASE("shortest path examples", "[network]") {
  const std::vector<double> w{0.3, 0.5};
  const ShortestPath sp = shortest_path(parallel(), w, 0, 1);
  CHECK(sp.path == Path{0});
  CHECK(sp.length == Approx(0.3));

  const std::vector<double> wd{0.1, 0.1, 0.3, 0.05};
  const ShortestPath d = shortest_path(diamond(), wd, 0, 3);
  CHECK(d.path == Path{0, 1});
  CHECK(d.length == Approx(0.2));
}

TEST_CASE("shortest path errors", "[network]") {
  const std::vector<double> w{0.3, -0.1};
  CHECK_THROWS_AS(shortest_path(parallel(), w, 0, 1), ArgumentError);
  const std::vector<double> ok{0.3, 0.1};
  CHECK_THROWS_AS(shortest_path(parallel(), ok, 1, 0), NoPathError);
}

TEST_CASE("ties resolve to the smaller edge id", "[network]") {
  const std::vector<double> w{0.4, 0.4};
  CHECK(shortest_path(parallel(), w, 0, 1).path == Path{0});
  const std::vector<double> wd{0.1, 0.1, 0.1, 0.1};
  CHECK(shortest_path(diamond(), wd, 0, 3).path == Path{0, 1});
}

TEST_CASE("shortest path avoiding an edge", "[network]") {
  const std::vector<double> w{0.3, 0.5};
  CHECK(shortest_path_avoiding_edge(parallel(), w, 0, 1, 0) == Approx(0.5));
  CHECK(shortest_path_avoiding_edge(parallel(), w, 0, 1, 1) == Approx(0.3));

  const Network single(2, {{0, 1}});
  const std::vector<double> w1{0.2};
  CHECK(shortest_path_avoiding_edge(single, w1, 0, 1, 0) == kInfinity);

  const std::vector<double> wd{0.1, 0.1, 0.3, 0.05};
  CHECK(shortest_path_avoiding_edge(diamond(), wd, 0, 3, 0) == Approx(0.35));
}

TEST_CASE("shortest walk through an edge", "[network]") {
  const std::vector<double> w{0.3, 0.5};
  CHECK(shortest_path_through_edge(parallel(), w, 0, 1, 1) == Approx(0.5));

  const std::vector<double> wd{0.1, 0.2, 0.3, 0.05};
  CHECK(shortest_path_through_edge(diamond(), wd, 0, 3, 1) == Approx(0.3));
  const auto walk = shortest_walk_through_edge(diamond(), wd, 0, 3, 3);
  REQUIRE(walk.has_value());
  CHECK(walk->walk == Path{2, 3});
  CHECK(walk->simple);

  // Edge 1→0 cannot be on any 0→2 path without revisiting 0.
  const Network back(3, {{0, 1}, {1, 0}, {1, 2}});
  const std::vector<double> wb{0.1, 0.1, 0.1};
  const auto loop = shortest_walk_through_edge(back, wb, 0, 2, 1);
  REQUIRE(loop.has_value());
  CHECK_FALSE(loop->simple);
  CHECK_FALSE(shortest_simple_path_through_edge(back, wb, 0, 2, 1).has_value());

  // The two-leg walk 0→1→2→1→3 repeats vertex 1; the simple path 0→2→1→3 costs more.
  const Network detour(4, {{0, 1}, {1, 2}, {2, 1}, {1, 3}, {0, 2}});
  const std::vector<double> wt{0.1, 0.1, 0.1, 0.1, 0.5};
  const auto two_leg = shortest_walk_through_edge(detour, wt, 0, 3, 2);
  REQUIRE(two_leg.has_value());
  CHECK_FALSE(two_leg->simple);
  CHECK(two_leg->length == Approx(0.4));
  const auto exact = shortest_simple_path_through_edge(detour, wt, 0, 3, 2);
  REQUIRE(exact.has_value());
  CHECK(exact->path == Path{4, 2, 3});
  CHECK(exact->length == Approx(0.7));
}

TEST_CASE("flow decomposition examples", "[network]") {
  const std::vector<double> y{0.4, 0.6};
  const auto paths = flow_decompose(parallel(), y, 0, 1, 1.0);
  REQUIRE(paths.size() == 2);
  double total = 0.0;
  for (const auto& p : paths) {
    total += p.weight;
    CHECK(p.weight == Approx(y[static_cast<std::size_t>(p.path[0])]));
  }
  CHECK(total == Approx(1.0));

  const std::vector<double> yd{0.5, 0.5, 0.5, 0.5};
  const auto dp = flow_decompose(diamond(), yd, 0, 3, 1.0);
  REQUIRE(dp.size() == 2);
  for (const auto& p : dp) CHECK(p.weight == Approx(0.5));
  const auto back = path_loads(diamond(), dp);
  for (std::size_t e = 0; e < 4; ++e) CHECK(back[e] == Approx(0.5).margin(1e-12));
}

TEST_CASE("flow decomposition rejects broken conservation", "[network]") {
  const std::vector<double> y{0.5, 0.3, 0.5, 0.5};
  CHECK_THROWS_AS(flow_decompose(diamond(), y, 0, 3, 1.0), DecompositionError);
}

TEST_CASE("path enumeration respects its limit", "[network]") {
  CHECK(enumerate_simple_paths(diamond(), 0, 3).size() == 2);
  CHECK_THROWS_AS(enumerate_simple_paths(diamond(), 0, 3, 1), SizeError);
}

TEST_CASE("Dijkstra agrees with Bellman-Ford and enumeration", "[network][property]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 6);
    const Network g = random_dag_like(rng, n);
    std::vector<double> w(static_cast<std::size_t>(g.edge_count()));
    for (double& x : w) x = U(rng);
    const int s = 0, t = n - 1;
    if (!g.reachable(s, t)) {
      CHECK_THROWS_AS(shortest_path(g, w, s, t), NoPathError);
      continue;
    }
    const ShortestPath d = shortest_path(g, w, s, t);
    CHECK(is_simple_path(g, d.path, s, t));
    CHECK(d.length == Approx(shortest_path_bellman_ford(g, w, s, t).length).margin(1e-12));
    CHECK(d.length == Approx(enumerated_min(g, w, s, t)).margin(1e-12));
    for (int e = 0; e < g.edge_count(); ++e) {
      CHECK(shortest_path_avoiding_edge(g, w, s, t, e) ==
            Approx(enumerated_min(g, w, s, t, -1, e)).margin(1e-12));
      const auto walk = shortest_walk_through_edge(g, w, s, t, e);
      const double oracle = enumerated_min(g, w, s, t, e);
      if (!walk) {
        CHECK(oracle == kInfinity);
      } else if (walk->simple) {
        CHECK(walk->length == Approx(oracle).margin(1e-12));
      } else {
        // A walk never costs more than the best simple path through the edge.
        CHECK(walk->length <= oracle + 1e-12);
      }
      const auto simple = shortest_simple_path_through_edge(g, w, s, t, e);
      if (oracle == kInfinity) {
        CHECK_FALSE(simple.has_value());
      } else {
        REQUIRE(simple.has_value());
        CHECK(simple->length == Approx(oracle).margin(1e-12));
        CHECK(is_simple_path(g, simple->path, s, t));
        CHECK(std::find(simple->path.begin(), simple->path.end(), e) != simple->path.end());
      }
    }
    ++compared;
  }
  CHECK(compared > 50);
}

TEST_CASE("gap sweep equals enumeration on random small networks", "[network][property]") {
  const auto stats = oracles::network_sweep_equivalence(50, 8, 2024);
  CHECK(stats.networks == 50);
  CHECK(stats.comparisons > 100);
  CHECK(stats.mismatches == 0);
  CHECK(stats.max_error <= 1e-9);
  CHECK(stats.decompositions > 0);
  CHECK(stats.decomposition_failures == 0);
}
