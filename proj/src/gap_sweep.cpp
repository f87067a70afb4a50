#include <algorithm>
#include <limits>
#include <string>

#include "taxlearn/errors.hpp"
#include "taxlearn/explore.hpp"

namespace taxlearn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double network_gap_sweep(const Game& game, const Strategy& x, std::span<const double> cost,
                         std::span<const double> tau_prime, int j, int f, SweepDirection direction,
                         double tol) {
  const net::Network& network = game.network();
  const Commodity& c = game.commodity(j);
  std::vector<double> w(cost.size());
  for (std::size_t e = 0; e < w.size(); ++e) w[e] = cost[e] + tau_prime[e];

  double in_support_max = -kInf;
  double through_f = 0.0;
  for (const ActionFlow& flow : x.at(static_cast<std::size_t>(j))) {
    if (flow.weight <= kSupportTol) continue;
    in_support_max = std::max(in_support_max, action_cost(flow.action, w));
    if (contains_facility(flow.action, f)) through_f += flow.weight;
  }
  const bool carries_all = through_f >= c.weight - kSupportTol;
  const bool carries_none = through_f <= kSupportTol;
  if (!carries_all && !carries_none) {
    throw ContractError("network_gap_sweep: edge " + std::to_string(f) +
                        " carries part of commodity " + std::to_string(j) + "'s flow");
  }
  const double shortest = net::shortest_path(network, w, c.source, c.target).length;
  if (shortest < in_support_max - tol) {
    throw ContractError("network_gap_sweep: strategy is not an equilibrium at the current tax");
  }
  const double current = tau_prime[static_cast<std::size_t>(f)];

  if (direction == SweepDirection::kRaise) {
    // In-support paths all move with u, so the boundary is reached when they
    // catch up with the cheapest path avoiding f.
    if (carries_none) return kInf;
    const double avoid = net::shortest_path_avoiding_edge(network, w, c.source, c.target, f);
    return avoid - (in_support_max - current);
  }
  // Lowering: only paths through f get cheaper.
  if (carries_all) return -kInf;
  const auto through = net::shortest_simple_path_through_edge(network, w, c.source, c.target, f);
  if (!through) return -kInf;
  return in_support_max - (through->length - current);
}

}  // namespace taxlearn
