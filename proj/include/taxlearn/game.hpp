#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taxlearn/cost.hpp"
#include "taxlearn/network.hpp"
#include "taxlearn/pwl.hpp"

namespace taxlearn {

// Weights above this count as in-support.
inline constexpr double kSupportTol = 1e-9;
// Loads may leave [0,1] by this much from rounding and are clamped back.
inline constexpr double kLoadClampTol = 1e-9;
inline constexpr double kWeightSumTol = 1e-12;

/// Facility ids. Explicit games keep them sorted; network paths keep edge
/// traversal order.
using Action = std::vector<int>;
using LoadVector = std::vector<double>;
using CostVector = std::vector<double>;
using TaxVector = std::vector<double>;

struct Commodity {
  double weight = 0.0;
  std::vector<Action> actions;  // explicit games only
  int source = -1;              // network games only
  int target = -1;
};

/// Mass placed on one action. `index` is the position in the commodity's
/// explicit action list, or -1 for network paths.
struct ActionFlow {
  Action action;
  double weight = 0.0;
  int index = -1;
};

/// Per commodity, the actions carrying positive (or zero) mass.
using Strategy = std::vector<std::vector<ActionFlow>>;

/// Congestion game with either explicit action sets or a network whose
/// s-t paths are the actions. Immutable after construction.
class Game {
 public:
  Game(std::vector<CostFunction> costs, std::vector<Commodity> commodities);
  Game(net::Network network, std::vector<CostFunction> costs, std::vector<Commodity> commodities);

  int facility_count() const { return static_cast<int>(costs_.size()); }
  int commodity_count() const { return static_cast<int>(commodities_.size()); }
  const CostFunction& cost(int f) const { return costs_.at(static_cast<std::size_t>(f)); }
  std::span<const CostFunction> costs() const { return costs_; }
  const Commodity& commodity(int i) const { return commodities_.at(static_cast<std::size_t>(i)); }

  bool is_network() const { return network_.has_value(); }
  const net::Network& network() const;

  // Largest smoothness constant over all facility costs.
  double smoothness() const;

  // Explicit action list of commodity i; network games enumerate simple paths
  // (SizeError past `limit`).
  std::vector<Action> action_set(int i, std::size_t limit = 100000) const;
  std::size_t total_actions(std::size_t limit = 100000) const;

  // Same game with every network path turned into an explicit action.
  Game to_explicit(std::size_t limit = 100000) const;

 private:
  void validate() const;

  std::vector<CostFunction> costs_;
  std::vector<Commodity> commodities_;
  std::optional<net::Network> network_;
};

/// Two vertices joined by two parallel edges: edge 0 has constant cost c,
/// edge 1 has cost u^p. One commodity of weight 1.
Game make_pigou(double c, double p);

// Uniform split over the explicit actions, or everything on the free-flow
// shortest path for network games.
Strategy uniform_strategy(const Game& game);

double action_cost(const Action& action, std::span<const double> cost);
bool contains_facility(const Action& action, int f);

/// y_f = sum_i sum_{a ∋ f} x_{i,a}. Throws ConstraintError for infeasible x.
LoadVector facility_load(const Game& game, const Strategy& x);
/// Per-commodity loads y_i; they sum to facility_load.
std::vector<LoadVector> commodity_loads(const Game& game, const Strategy& x);
void check_feasible(const Game& game, const Strategy& x);

CostVector facility_costs(const Game& game, std::span<const double> y);
/// c_f(y_f) + tau_f(y_f); empty `taxes` means untaxed.
CostVector taxed_costs(const Game& game, std::span<const PiecewiseLinear> taxes,
                       std::span<const double> y);

/// sum_f ∫_0^{y_f} (c_f + tau_f). Closed-form cost antiderivative plus exact
/// PWL integral.
double potential(const Game& game, std::span<const PiecewiseLinear> taxes,
                 std::span<const double> y);
double social_cost(const Game& game, std::span<const double> y);

/// Cheapest off-support action minus dearest in-support action of commodity i
/// under cost vector c; +∞ when every action is in support.
double gap(const Game& game, int i, const Strategy& x, std::span<const double> cost);

/// Every in-support action within eps of the cheapest action, per commodity.
bool is_epsilon_equilibrium(const Game& game, const Strategy& x, std::span<const double> cost,
                            double eps);

/// Largest (in-support cost - cheapest cost) over commodities.
double equilibrium_residual(const Game& game, const Strategy& x, std::span<const double> cost,
                            double support_tol = kSupportTol);

/// Cheapest action of commodity i. Explicit games break ties towards the lowest
/// action index; network games use the deterministic shortest path.
struct BestResponse {
  Action action;
  int index = -1;
  double cost = 0.0;
};
BestResponse best_response(const Game& game, int i, std::span<const double> taxed_cost);

}  // namespace taxlearn
