#pragma once

#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace taxlearn::net {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Edge {
  int from;
  int to;
};

/// Directed multigraph; edge ids are facility ids. Parallel edges are allowed,
/// self-loops are not.
class Network {
 public:
  Network(int vertex_count, std::vector<Edge> edges);

  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(int id) const { return edges_.at(static_cast<std::size_t>(id)); }
  std::span<const Edge> edges() const { return edges_; }
  // Outgoing edge ids of v, ascending.
  std::span<const int> out_edges(int v) const { return out_[static_cast<std::size_t>(v)]; }

  bool reachable(int source, int target, int excluded_edge = -1) const;

 private:
  int vertex_count_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> out_;
};

/// Edge ids in traversal order.
using Path = std::vector<int>;

struct ShortestPath {
  Path path;
  double length;
};

/// Dijkstra with a binary heap. Weights must be non-negative (ArgumentError
/// otherwise). Ties keep the predecessor edge with the smaller id, so results
/// are deterministic. Throws NoPathError when target is unreachable.
ShortestPath shortest_path(const Network& net, std::span<const double> weights, int source,
                           int target);

/// Bellman-Ford; accepts negative weights. Throws ArgumentError on a negative
/// cycle reachable from source and NoPathError when target is unreachable.
ShortestPath shortest_path_bellman_ford(const Network& net, std::span<const double> weights,
                                        int source, int target);

/// Shortest path with one edge removed; nullopt when source and target disconnect.
std::optional<ShortestPath> shortest_path_excluding(const Network& net,
                                                    std::span<const double> weights, int source,
                                                    int target, int excluded_edge);

/// Length of the shortest source→target path after deleting edge f, or +∞.
double shortest_path_avoiding_edge(const Network& net, std::span<const double> weights,
                                   int source, int target, int edge);

/// Shortest source→tail(f), then f, then head(f)→target; both legs avoid f.
/// The result is a walk and may revisit vertices.
struct ThroughEdgeWalk {
  Path walk;
  double length;
  bool simple;
};
std::optional<ThroughEdgeWalk> shortest_walk_through_edge(const Network& net,
                                                          std::span<const double> weights,
                                                          int source, int target, int edge);

/// Length of shortest_walk_through_edge, or +∞.
double shortest_path_through_edge(const Network& net, std::span<const double> weights,
                                  int source, int target, int edge);

/// Cheapest simple source→target path containing `edge`. Returns the two-leg
/// walk when it is simple; otherwise runs an exact depth-first branch and bound
/// (SizeError past `expansion_limit` search nodes). nullopt when no simple path
/// uses the edge.
std::optional<ShortestPath> shortest_simple_path_through_edge(const Network& net,
                                                             std::span<const double> weights,
                                                             int source, int target, int edge,
                                                             std::size_t expansion_limit = 10'000'000);

/// All simple source→target paths in DFS order (ascending edge ids). Throws
/// SizeError when more than `limit` paths exist.
std::vector<Path> enumerate_simple_paths(const Network& net, int source, int target,
                                         std::size_t limit = 100000);

bool is_simple_path(const Network& net, const Path& path, int source, int target);

struct PathWeight {
  Path path;
  double weight;
};

/// Splits one commodity's edge load into weighted simple source→target paths:
/// repeatedly take the positive edge with the smallest residual, route a path
/// through it on positive-residual edges, and subtract. Emits at most E paths.
/// Throws DecompositionError when conservation fails or no path exists.
std::vector<PathWeight> flow_decompose(const Network& net, std::span<const double> load,
                                       int source, int target, double weight);

/// Edge loads induced by weighted paths.
std::vector<double> path_loads(const Network& net, std::span<const PathWeight> paths);

}  // namespace taxlearn::net
