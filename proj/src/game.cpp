#include "taxlearn/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "taxlearn/errors.hpp"

namespace taxlearn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStrategySumTol = 1e-9;

double clamp_load(double y) {
  if (y < -kLoadClampTol || y > 1.0 + kLoadClampTol || !std::isfinite(y)) {
    throw ConstraintError("load " + std::to_string(y) + " outside [0,1]");
  }
  return std::clamp(y, 0.0, 1.0);
}

double unit_clamp(double y) { return std::clamp(y, 0.0, 1.0); }

std::string commodity_label(int i) { return "commodity " + std::to_string(i); }

net::ShortestPath cheapest_path(const net::Network& network, std::span<const double> weights,
                                int s, int t) {
  const bool negative =
      std::any_of(weights.begin(), weights.end(), [](double w) { return w < 0.0; });
  return negative ? net::shortest_path_bellman_ford(network, weights, s, t)
                  : net::shortest_path(network, weights, s, t);
}

}  // namespace

Game::Game(std::vector<CostFunction> costs, std::vector<Commodity> commodities)
    : costs_(std::move(costs)), commodities_(std::move(commodities)) {
  for (Commodity& c : commodities_) {
    for (Action& a : c.actions) std::sort(a.begin(), a.end());
  }
  validate();
}

Game::Game(net::Network network, std::vector<CostFunction> costs,
           std::vector<Commodity> commodities)
    : costs_(std::move(costs)), commodities_(std::move(commodities)), network_(std::move(network)) {
  validate();
}

const net::Network& Game::network() const {
  if (!network_) throw ArgumentError("game: not a network game");
  return *network_;
}

void Game::validate() const {
  if (costs_.empty()) throw InstanceError("game: no facilities");
  if (commodities_.empty()) throw InstanceError("game: no commodities");
  for (const CostFunction& c : costs_) c.validate();
  const int F = facility_count();
  if (network_ && network_->edge_count() != F) {
    throw InstanceError("game: edge count differs from the number of cost functions");
  }
  double total = 0.0;
  for (int i = 0; i < commodity_count(); ++i) {
    const Commodity& c = commodities_[static_cast<std::size_t>(i)];
    if (!(c.weight > 0.0) || c.weight > 1.0) {
      throw InstanceError("game: " + commodity_label(i) + " weight must lie in (0,1]");
    }
    total += c.weight;
    if (network_) {
      if (c.source < 0 || c.source >= network_->vertex_count() || c.target < 0 ||
          c.target >= network_->vertex_count()) {
        throw InstanceError("game: " + commodity_label(i) + " endpoint out of range");
      }
      if (c.source == c.target) {
        throw InstanceError("game: " + commodity_label(i) + " has source equal to target");
      }
      if (!network_->reachable(c.source, c.target)) {
        throw InstanceError("game: " + commodity_label(i) + " has no source-target path");
      }
      continue;
    }
    if (c.actions.empty()) throw InstanceError("game: " + commodity_label(i) + " has no actions");
    for (std::size_t a = 0; a < c.actions.size(); ++a) {
      const Action& act = c.actions[a];
      if (act.empty()) throw InstanceError("game: " + commodity_label(i) + " has an empty action");
      if (std::adjacent_find(act.begin(), act.end()) != act.end()) {
        throw InstanceError("game: " + commodity_label(i) + " action repeats a facility");
      }
      for (int f : act) {
        if (f < 0 || f >= F) {
          throw InstanceError("game: " + commodity_label(i) + " action uses unknown facility " +
                              std::to_string(f));
        }
      }
      for (std::size_t b = 0; b < a; ++b) {
        if (c.actions[b] == act) {
          throw InstanceError("game: " + commodity_label(i) + " lists an action twice");
        }
      }
    }
  }
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw InstanceError("game: commodity weights sum to " + std::to_string(total) + ", not 1");
  }
}

double Game::smoothness() const {
  double beta = 0.0;
  for (const CostFunction& c : costs_) beta = std::max(beta, c.smoothness());
  return beta;
}

std::vector<Action> Game::action_set(int i, std::size_t limit) const {
  const Commodity& c = commodity(i);
  if (!network_) return c.actions;
  return net::enumerate_simple_paths(*network_, c.source, c.target, limit);
}

std::size_t Game::total_actions(std::size_t limit) const {
  std::size_t total = 0;
  for (int i = 0; i < commodity_count(); ++i) total += action_set(i, limit).size();
  return total;
}

Game Game::to_explicit(std::size_t limit) const {
  if (!network_) return *this;
  std::vector<Commodity> explicit_commodities;
  for (int i = 0; i < commodity_count(); ++i) {
    Commodity c;
    c.weight = commodity(i).weight;
    c.actions = action_set(i, limit);
    explicit_commodities.push_back(std::move(c));
  }
  return Game(costs_, std::move(explicit_commodities));
}

Game make_pigou(double c, double p) {
  if (!(c > 0.0 && c <= 1.0)) throw InstanceError("pigou: c must lie in (0,1]");
  if (!(p >= 1.0)) throw InstanceError("pigou: p must be at least 1");
  net::Network network(2, {{0, 1}, {0, 1}});
  Commodity commodity;
  commodity.weight = 1.0;
  commodity.source = 0;
  commodity.target = 1;
  return Game(std::move(network), {CostFunction::constant(c), CostFunction::monomial(1.0, p)},
              {commodity});
}

Strategy uniform_strategy(const Game& game) {
  Strategy x(static_cast<std::size_t>(game.commodity_count()));
  if (game.is_network()) {
    std::vector<double> free_flow;
    for (const CostFunction& c : game.costs()) free_flow.push_back(c.value(0.0));
    for (int i = 0; i < game.commodity_count(); ++i) {
      const Commodity& c = game.commodity(i);
      auto sp = net::shortest_path(game.network(), free_flow, c.source, c.target);
      x[static_cast<std::size_t>(i)].push_back({std::move(sp.path), c.weight, -1});
    }
    return x;
  }
  for (int i = 0; i < game.commodity_count(); ++i) {
    const Commodity& c = game.commodity(i);
    const double share = c.weight / static_cast<double>(c.actions.size());
    for (std::size_t a = 0; a < c.actions.size(); ++a) {
      x[static_cast<std::size_t>(i)].push_back({c.actions[a], share, static_cast<int>(a)});
    }
  }
  return x;
}

double action_cost(const Action& action, std::span<const double> cost) {
  double total = 0.0;
  for (int f : action) total += cost[static_cast<std::size_t>(f)];
  return total;
}

bool contains_facility(const Action& action, int f) {
  return std::find(action.begin(), action.end(), f) != action.end();
}

void check_feasible(const Game& game, const Strategy& x) {
  if (static_cast<int>(x.size()) != game.commodity_count()) {
    throw ConstraintError("strategy: commodity count mismatch");
  }
  for (int i = 0; i < game.commodity_count(); ++i) {
    const Commodity& c = game.commodity(i);
    double total = 0.0;
    for (const ActionFlow& flow : x[static_cast<std::size_t>(i)]) {
      if (!(flow.weight >= -kSupportTol) || !std::isfinite(flow.weight)) {
        throw ConstraintError("strategy: negative weight in " + commodity_label(i));
      }
      total += flow.weight;
      if (game.is_network()) {
        if (!net::is_simple_path(game.network(), flow.action, c.source, c.target)) {
          throw ConstraintError("strategy: " + commodity_label(i) +
                                " uses something other than a simple source-target path");
        }
      } else {
        const bool known = flow.index >= 0 && static_cast<std::size_t>(flow.index) < c.actions.size()
                               ? c.actions[static_cast<std::size_t>(flow.index)] == flow.action
                               : std::any_of(c.actions.begin(), c.actions.end(),
                                             [&](const Action& a) { return a == flow.action; });
        if (!known) throw ConstraintError("strategy: action not in the set of " + commodity_label(i));
      }
    }
    if (std::abs(total - c.weight) > kStrategySumTol) {
      throw ConstraintError("strategy: " + commodity_label(i) + " weights sum to " +
                            std::to_string(total) + ", expected " + std::to_string(c.weight));
    }
  }
}

std::vector<LoadVector> commodity_loads(const Game& game, const Strategy& x) {
  check_feasible(game, x);
  const auto F = static_cast<std::size_t>(game.facility_count());
  std::vector<LoadVector> loads(x.size(), LoadVector(F, 0.0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (const ActionFlow& flow : x[i]) {
      for (int f : flow.action) loads[i][static_cast<std::size_t>(f)] += flow.weight;
    }
  }
  return loads;
}

LoadVector facility_load(const Game& game, const Strategy& x) {
  const auto per_commodity = commodity_loads(game, x);
  LoadVector y(static_cast<std::size_t>(game.facility_count()), 0.0);
  for (const LoadVector& yi : per_commodity) {
    for (std::size_t f = 0; f < y.size(); ++f) y[f] += yi[f];
  }
  for (double& v : y) v = clamp_load(v);
  return y;
}

CostVector facility_costs(const Game& game, std::span<const double> y) {
  CostVector c(y.size());
  for (std::size_t f = 0; f < y.size(); ++f) {
    c[f] = game.cost(static_cast<int>(f)).value(unit_clamp(y[f]));
  }
  return c;
}

CostVector taxed_costs(const Game& game, std::span<const PiecewiseLinear> taxes,
                       std::span<const double> y) {
  CostVector c = facility_costs(game, y);
  if (!taxes.empty()) {
    for (std::size_t f = 0; f < y.size(); ++f) c[f] += taxes[f](unit_clamp(y[f]));
  }
  return c;
}

double potential(const Game& game, std::span<const PiecewiseLinear> taxes,
                 std::span<const double> y) {
  if (static_cast<int>(y.size()) != game.facility_count()) {
    throw ArgumentError("potential: load size differs from facility count");
  }
  double total = 0.0;
  for (std::size_t f = 0; f < y.size(); ++f) {
    if (!(y[f] >= 0.0 && y[f] <= 1.0)) throw DomainError("potential: load outside [0,1]");
    total += game.cost(static_cast<int>(f)).antiderivative(y[f]);
    if (!taxes.empty()) total += taxes[f].integral(y[f]);
  }
  return total;
}

double social_cost(const Game& game, std::span<const double> y) {
  double total = 0.0;
  for (std::size_t f = 0; f < y.size(); ++f) {
    if (!(y[f] >= 0.0 && y[f] <= 1.0)) throw DomainError("social_cost: load outside [0,1]");
    total += y[f] * game.cost(static_cast<int>(f)).value(y[f]);
  }
  return total;
}

double gap(const Game& game, int i, const Strategy& x, std::span<const double> cost) {
  double max_in = -kInf;
  std::vector<Action> support;
  for (const ActionFlow& flow : x.at(static_cast<std::size_t>(i))) {
    if (flow.weight <= kSupportTol) continue;
    max_in = std::max(max_in, action_cost(flow.action, cost));
    support.push_back(flow.action);
    if (!game.is_network()) std::sort(support.back().begin(), support.back().end());
  }
  double min_off = kInf;
  for (const Action& a : game.action_set(i)) {
    if (std::find(support.begin(), support.end(), a) == support.end()) {
      min_off = std::min(min_off, action_cost(a, cost));
    }
  }
  if (min_off == kInf) return kInf;
  return min_off - max_in;
}

BestResponse best_response(const Game& game, int i, std::span<const double> taxed_cost) {
  for (double v : taxed_cost) {
    if (!std::isfinite(v)) throw ArgumentError("best_response: non-finite cost");
  }
  const Commodity& c = game.commodity(i);
  if (game.is_network()) {
    auto sp = cheapest_path(game.network(), taxed_cost, c.source, c.target);
    return {std::move(sp.path), -1, sp.length};
  }
  BestResponse best;
  best.cost = kInf;
  for (std::size_t a = 0; a < c.actions.size(); ++a) {
    const double v = action_cost(c.actions[a], taxed_cost);
    if (v < best.cost) {
      best.cost = v;
      best.index = static_cast<int>(a);
    }
  }
  best.action = c.actions[static_cast<std::size_t>(best.index)];
  return best;
}

double equilibrium_residual(const Game& game, const Strategy& x, std::span<const double> cost,
                            double support_tol) {
  double worst = 0.0;
  for (int i = 0; i < game.commodity_count(); ++i) {
    const double cheapest = best_response(game, i, cost).cost;
    for (const ActionFlow& flow : x.at(static_cast<std::size_t>(i))) {
      if (flow.weight > support_tol) {
        worst = std::max(worst, action_cost(flow.action, cost) - cheapest);
      }
    }
  }
  return worst;
}

bool is_epsilon_equilibrium(const Game& game, const Strategy& x, std::span<const double> cost,
                            double eps) {
  return equilibrium_residual(game, x, cost) <= eps;
}

}  // namespace taxlearn
