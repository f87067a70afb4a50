#include "taxlearn/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <string>

#include "taxlearn/errors.hpp"

namespace taxlearn::net {
namespace {

constexpr double kResidualTol = 1e-13;
constexpr double kConservationTol = 1e-9;

void check_vertex(const Network& net, int v, const char* what) {
  if (v < 0 || v >= net.vertex_count()) {
    throw ArgumentError(std::string("network: ") + what + " vertex out of range");
  }
}

void check_weights(const Network& net, std::span<const double> weights) {
  if (static_cast<int>(weights.size()) != net.edge_count()) {
    throw ArgumentError("network: weight vector size differs from edge count");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ArgumentError("network: edge weights must be finite and non-negative");
    }
  }
}

struct Tree {
  std::vector<double> dist;
  std::vector<int> pred;  // incoming edge id on the tree, -1 at the root
};

Tree dijkstra(const Network& net, std::span<const double> weights, int source,
              int excluded_edge) {
  const auto n = static_cast<std::size_t>(net.vertex_count());
  Tree tree{std::vector<double>(n, kInfinity), std::vector<int>(n, -1)};
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  std::vector<char> done(n, 0);
  tree.dist[static_cast<std::size_t>(source)] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (done[static_cast<std::size_t>(v)]) continue;
    done[static_cast<std::size_t>(v)] = 1;
    for (int e : net.out_edges(v)) {
      if (e == excluded_edge) continue;
      const int to = net.edge(e).to;
      const auto ti = static_cast<std::size_t>(to);
      if (done[ti]) continue;
      const double candidate = d + weights[static_cast<std::size_t>(e)];
      if (candidate < tree.dist[ti] || (candidate == tree.dist[ti] && e < tree.pred[ti])) {
        tree.dist[ti] = candidate;
        tree.pred[ti] = e;
        heap.emplace(candidate, to);
      }
    }
  }
  return tree;
}

Path trace_back(const Network& net, const Tree& tree, int source, int target) {
  Path path;
  int v = target;
  while (v != source) {
    const int e = tree.pred[static_cast<std::size_t>(v)];
    path.push_back(e);
    v = net.edge(e).from;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

Network::Network(int vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
  if (vertex_count < 1) throw ArgumentError("network: need at least one vertex");
  out_.resize(static_cast<std::size_t>(vertex_count));
  for (std::size_t id = 0; id < edges_.size(); ++id) {
    const Edge& e = edges_[id];
    if (e.from < 0 || e.from >= vertex_count || e.to < 0 || e.to >= vertex_count) {
      throw ArgumentError("network: edge endpoint out of range");
    }
    if (e.from == e.to) throw ArgumentError("network: self-loops are not allowed");
    out_[static_cast<std::size_t>(e.from)].push_back(static_cast<int>(id));
  }
}

bool Network::reachable(int source, int target, int excluded_edge) const {
  std::vector<char> seen(static_cast<std::size_t>(vertex_count_), 0);
  std::vector<int> stack{source};
  seen[static_cast<std::size_t>(source)] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (v == target) return true;
    for (int e : out_edges(v)) {
      if (e == excluded_edge) continue;
      const auto to = static_cast<std::size_t>(edge(e).to);
      if (!seen[to]) {
        seen[to] = 1;
        stack.push_back(edge(e).to);
      }
    }
  }
  return false;
}

std::optional<ShortestPath> shortest_path_excluding(const Network& net,
                                                    std::span<const double> weights, int source,
                                                    int target, int excluded_edge) {
  check_vertex(net, source, "source");
  check_vertex(net, target, "target");
  check_weights(net, weights);
  const Tree tree = dijkstra(net, weights, source, excluded_edge);
  const double d = tree.dist[static_cast<std::size_t>(target)];
  if (!std::isfinite(d)) return std::nullopt;
  return ShortestPath{trace_back(net, tree, source, target), d};
}

ShortestPath shortest_path(const Network& net, std::span<const double> weights, int source,
                           int target) {
  auto sp = shortest_path_excluding(net, weights, source, target, -1);
  if (!sp) {
    throw NoPathError("network: vertex " + std::to_string(target) + " unreachable from " +
                      std::to_string(source));
  }
  return *std::move(sp);
}

ShortestPath shortest_path_bellman_ford(const Network& net, std::span<const double> weights,
                                        int source, int target) {
  check_vertex(net, source, "source");
  check_vertex(net, target, "target");
  if (static_cast<int>(weights.size()) != net.edge_count()) {
    throw ArgumentError("network: weight vector size differs from edge count");
  }
  const auto n = static_cast<std::size_t>(net.vertex_count());
  std::vector<double> dist(n, kInfinity);
  std::vector<int> pred(n, -1);
  dist[static_cast<std::size_t>(source)] = 0.0;
  bool changed = true;
  for (std::size_t pass = 0; pass < n && changed; ++pass) {
    changed = false;
    for (int e = 0; e < net.edge_count(); ++e) {
      const Edge& edge = net.edge(e);
      const double d = dist[static_cast<std::size_t>(edge.from)];
      if (!std::isfinite(d)) continue;
      const double candidate = d + weights[static_cast<std::size_t>(e)];
      auto& best = dist[static_cast<std::size_t>(edge.to)];
      if (candidate < best) {
        best = candidate;
        pred[static_cast<std::size_t>(edge.to)] = e;
        changed = true;
      }
    }
  }
  if (changed) throw ArgumentError("network: negative cycle reachable from source");
  if (!std::isfinite(dist[static_cast<std::size_t>(target)])) {
    throw NoPathError("network: vertex " + std::to_string(target) + " unreachable from " +
                      std::to_string(source));
  }
  Tree tree{std::move(dist), std::move(pred)};
  return ShortestPath{trace_back(net, tree, source, target),
                      tree.dist[static_cast<std::size_t>(target)]};
}

double shortest_path_avoiding_edge(const Network& net, std::span<const double> weights,
                                   int source, int target, int edge) {
  auto sp = shortest_path_excluding(net, weights, source, target, edge);
  return sp ? sp->length : kInfinity;
}

std::optional<ThroughEdgeWalk> shortest_walk_through_edge(const Network& net,
                                                          std::span<const double> weights,
                                                          int source, int target, int edge) {
  const Edge& e = net.edge(edge);
  auto head_leg = shortest_path_excluding(net, weights, source, e.from, edge);
  if (!head_leg) return std::nullopt;
  auto tail_leg = shortest_path_excluding(net, weights, e.to, target, edge);
  if (!tail_leg) return std::nullopt;
  ThroughEdgeWalk walk;
  walk.walk = head_leg->path;
  walk.walk.push_back(edge);
  walk.walk.insert(walk.walk.end(), tail_leg->path.begin(), tail_leg->path.end());
  walk.length = head_leg->length + weights[static_cast<std::size_t>(edge)] + tail_leg->length;
  walk.simple = is_simple_path(net, walk.walk, source, target);
  return walk;
}

std::optional<ShortestPath> shortest_simple_path_through_edge(const Network& net,
                                                             std::span<const double> weights,
                                                             int source, int target, int edge,
                                                             std::size_t expansion_limit) {
  auto walk = shortest_walk_through_edge(net, weights, source, target, edge);
  if (!walk) return std::nullopt;
  if (walk->simple) return ShortestPath{walk->walk, walk->length};

  // Depth-first branch and bound. Distances to the tail of `edge` and to the
  // target on the reversed graph are admissible lower bounds.
  const Edge& through = net.edge(edge);
  std::vector<Edge> reversed;
  for (const Edge& e : net.edges()) reversed.push_back({e.to, e.from});
  const Network back(net.vertex_count(), std::move(reversed));
  const std::vector<double> to_tail = dijkstra(back, weights, through.from, edge).dist;
  const std::vector<double> to_target = dijkstra(back, weights, target, edge).dist;
  const double w_edge = weights[static_cast<std::size_t>(edge)];
  const double head_rest = to_target[static_cast<std::size_t>(through.to)];

  std::vector<char> on_path(static_cast<std::size_t>(net.vertex_count()), 0);
  Path current, best_path;
  double best = kInfinity;
  std::size_t expansions = 0;
  std::function<void(int, double, bool)> visit = [&](int v, double length, bool used) {
    if (++expansions > expansion_limit) {
      throw SizeError("network: simple path search through an edge exceeded its budget");
    }
    const auto vi = static_cast<std::size_t>(v);
    const double bound = used ? to_target[vi] : to_tail[vi] + w_edge + head_rest;
    if (!(length + bound < best)) return;
    if (v == target) {
      if (!used) return;
      best = length;
      best_path = current;
      return;
    }
    if (!used && v == through.from) {
      const auto hi = static_cast<std::size_t>(through.to);
      if (on_path[hi]) return;
      on_path[hi] = 1;
      current.push_back(edge);
      visit(through.to, length + w_edge, true);
      current.pop_back();
      on_path[hi] = 0;
      return;
    }
    for (int e : net.out_edges(v)) {
      if (e == edge) continue;
      const int to = net.edge(e).to;
      const auto ti = static_cast<std::size_t>(to);
      if (on_path[ti]) continue;
      on_path[ti] = 1;
      current.push_back(e);
      visit(to, length + weights[static_cast<std::size_t>(e)], used);
      current.pop_back();
      on_path[ti] = 0;
    }
  };
  on_path[static_cast<std::size_t>(source)] = 1;
  visit(source, 0.0, false);
  if (!std::isfinite(best)) return std::nullopt;
  return ShortestPath{best_path, best};
}

double shortest_path_through_edge(const Network& net, std::span<const double> weights,
                                  int source, int target, int edge) {
  auto walk = shortest_walk_through_edge(net, weights, source, target, edge);
  return walk ? walk->length : kInfinity;
}

bool is_simple_path(const Network& net, const Path& path, int source, int target) {
  if (path.empty()) return source == target;
  std::vector<char> seen(static_cast<std::size_t>(net.vertex_count()), 0);
  int v = source;
  seen[static_cast<std::size_t>(v)] = 1;
  for (int e : path) {
    if (net.edge(e).from != v) return false;
    v = net.edge(e).to;
    if (seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return v == target;
}

std::vector<Path> enumerate_simple_paths(const Network& net, int source, int target,
                                         std::size_t limit) {
  check_vertex(net, source, "source");
  check_vertex(net, target, "target");
  std::vector<Path> out;
  std::vector<char> on_path(static_cast<std::size_t>(net.vertex_count()), 0);
  Path current;
  std::function<void(int)> visit = [&](int v) {
    if (v == target) {
      if (out.size() >= limit) throw SizeError("network: too many simple paths to enumerate");
      out.push_back(current);
      return;
    }
    for (int e : net.out_edges(v)) {
      const int to = net.edge(e).to;
      if (on_path[static_cast<std::size_t>(to)]) continue;
      on_path[static_cast<std::size_t>(to)] = 1;
      current.push_back(e);
      visit(to);
      current.pop_back();
      on_path[static_cast<std::size_t>(to)] = 0;
    }
  };
  on_path[static_cast<std::size_t>(source)] = 1;
  visit(source);
  return out;
}

std::vector<double> path_loads(const Network& net, std::span<const PathWeight> paths) {
  std::vector<double> load(static_cast<std::size_t>(net.edge_count()), 0.0);
  for (const PathWeight& p : paths) {
    for (int e : p.path) load[static_cast<std::size_t>(e)] += p.weight;
  }
  return load;
}

namespace {

// Vertices from which `goal` is reachable using only edges with positive residual.
std::vector<char> can_reach(const Network& net, std::span<const double> residual, int goal) {
  std::vector<std::vector<int>> in(static_cast<std::size_t>(net.vertex_count()));
  for (int e = 0; e < net.edge_count(); ++e) {
    if (residual[static_cast<std::size_t>(e)] > kResidualTol) {
      in[static_cast<std::size_t>(net.edge(e).to)].push_back(e);
    }
  }
  std::vector<char> mark(static_cast<std::size_t>(net.vertex_count()), 0);
  std::vector<int> stack{goal};
  mark[static_cast<std::size_t>(goal)] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int e : in[static_cast<std::size_t>(v)]) {
      const int from = net.edge(e).from;
      if (!mark[static_cast<std::size_t>(from)]) {
        mark[static_cast<std::size_t>(from)] = 1;
        stack.push_back(from);
      }
    }
  }
  return mark;
}

// Simple source→target path on positive-residual edges that uses `through`.
std::optional<Path> route_through(const Network& net, std::span<const double> residual,
                                  int source, int target, int through) {
  const Edge& pivot = net.edge(through);
  const auto reach_tail = can_reach(net, residual, pivot.from);
  const auto reach_target = can_reach(net, residual, target);
  std::vector<char> on_path(static_cast<std::size_t>(net.vertex_count()), 0);
  Path current;
  long budget = 2'000'000;

  std::function<bool(int, bool)> visit = [&](int v, bool used) -> bool {
    if (--budget < 0) throw DecompositionError("flow_decompose: path search budget exhausted");
    if (used && v == target) return true;
    if (v == target) return false;
    for (int e : net.out_edges(v)) {
      if (residual[static_cast<std::size_t>(e)] <= kResidualTol) continue;
      const int to = net.edge(e).to;
      if (on_path[static_cast<std::size_t>(to)]) continue;
      bool next_used = used;
      if (e == through) {
        if (used) continue;
        next_used = true;
      } else if (!used && !reach_tail[static_cast<std::size_t>(to)]) {
        continue;
      }
      if (next_used && !reach_target[static_cast<std::size_t>(to)]) continue;
      on_path[static_cast<std::size_t>(to)] = 1;
      current.push_back(e);
      if (visit(to, next_used)) return true;
      current.pop_back();
      on_path[static_cast<std::size_t>(to)] = 0;
    }
    return false;
  };

  if (!reach_tail[static_cast<std::size_t>(source)]) return std::nullopt;
  on_path[static_cast<std::size_t>(source)] = 1;
  if (visit(source, false)) return current;
  return std::nullopt;
}

}  // namespace

std::vector<PathWeight> flow_decompose(const Network& net, std::span<const double> load,
                                       int source, int target, double weight) {
  check_vertex(net, source, "source");
  check_vertex(net, target, "target");
  if (static_cast<int>(load.size()) != net.edge_count()) {
    throw ArgumentError("flow_decompose: load size differs from edge count");
  }
  std::vector<double> balance(static_cast<std::size_t>(net.vertex_count()), 0.0);
  for (int e = 0; e < net.edge_count(); ++e) {
    const double y = load[static_cast<std::size_t>(e)];
    if (y < -kConservationTol) throw DecompositionError("flow_decompose: negative edge load");
    balance[static_cast<std::size_t>(net.edge(e).from)] += y;
    balance[static_cast<std::size_t>(net.edge(e).to)] -= y;
  }
  for (int v = 0; v < net.vertex_count(); ++v) {
    double expected = 0.0;
    if (v == source) expected += weight;
    if (v == target) expected -= weight;
    if (std::abs(balance[static_cast<std::size_t>(v)] - expected) > kConservationTol) {
      throw DecompositionError("flow_decompose: flow conservation violated at vertex " +
                               std::to_string(v));
    }
  }

  std::vector<double> residual(load.begin(), load.end());
  for (double& r : residual) r = std::max(r, 0.0);
  std::vector<PathWeight> paths;
  while (true) {
    int f_min = -1;
    for (int e = 0; e < net.edge_count(); ++e) {
      const double r = residual[static_cast<std::size_t>(e)];
      if (r > kResidualTol && (f_min < 0 || r < residual[static_cast<std::size_t>(f_min)])) {
        f_min = e;
      }
    }
    if (f_min < 0) break;
    if (static_cast<int>(paths.size()) >= net.edge_count()) {
      throw DecompositionError("flow_decompose: exceeded E extraction steps");
    }
    const double y_min = residual[static_cast<std::size_t>(f_min)];
    auto path = route_through(net, residual, source, target, f_min);
    if (!path) {
      throw DecompositionError("flow_decompose: no source-target path through edge " +
                               std::to_string(f_min) + " (load is not path-decomposable)");
    }
    for (int e : *path) {
      double& r = residual[static_cast<std::size_t>(e)];
      r -= y_min;
      if (r <= kResidualTol) r = 0.0;
    }
    residual[static_cast<std::size_t>(f_min)] = 0.0;
    paths.push_back({*std::move(path), y_min});
  }
  return paths;
}

}  // namespace taxlearn::net
