#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "taxlearn/equilibrium.hpp"
#include "taxlearn/game.hpp"
#include "taxlearn/pwl.hpp"

/// Brute-force references. Nothing here shares code paths with the solver or
/// the learner beyond the game model itself.
namespace taxlearn::oracles {

struct OracleReport {
  std::string quantity;
  double value = 0.0;
  // grid_search_1d | grid_search_nd | path_enumeration | analytic
  std::string method;
  double resolution = 0.0;
  LoadVector load;

  nlohmann::json to_json() const;
};

struct PigouSolution {
  double equilibrium_load;  // on the u^p edge, untaxed
  double optimal_load;
  double equilibrium_cost;
  double optimal_cost;
};

/// Closed-form first-order conditions: (c^{1/p}, (c/(p+1))^{1/p}, c,
/// c - c y* + y*^{p+1}).
PigouSolution pigou_analytic(double c, double p);

/// Total explicit actions allowed for the grid searches.
inline constexpr std::size_t kMaxOracleActions = 12;
inline constexpr double kMaxGridPoints = 1e6;

/// min over feasible loads of sum_f y_f c_f(y_f): grid search over the product
/// of strategy simplices, then compass refinement down to ~1e-9.
OracleReport optimal_social_cost(const Game& game);

/// Load minimising the taxed potential, with the potential evaluated by
/// composite Simpson quadrature rather than closed-form antiderivatives.
OracleReport equilibrium_by_enumeration(const Game& game, std::span<const PiecewiseLinear> taxes);

/// sum_f ∫_0^{y_f} (c_f + tau_f) by composite Simpson on 10^4 panels split at
/// the tax breakpoints.
class QuadraturePotential {
 public:
  QuadraturePotential(const Game& game, std::span<const PiecewiseLinear> taxes, int panels = 10000);
  double operator()(std::span<const double> y) const;
  double facility(int f, double y) const;

 private:
  double integrand(int f, double u) const;

  const Game* game_;
  std::vector<PiecewiseLinear> taxes_;
  std::vector<std::vector<double>> nodes_;
  std::vector<std::vector<double>> cumulative_;
};

/// Social cost of the solver's untaxed equilibrium over the optimal social
/// cost. The solver's equilibrium need not be the worst one when the untaxed
/// potential is not strictly convex. Throws DomainError when the optimum is 0.
double price_of_anarchy(const Game& game, const SolverConfig& cfg = {});

}  // namespace taxlearn::oracles
