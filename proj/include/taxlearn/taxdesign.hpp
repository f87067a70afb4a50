#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taxlearn/equilibrium.hpp"
#include "taxlearn/explore.hpp"
#include "taxlearn/game.hpp"
#include "taxlearn/pwl.hpp"

namespace taxlearn {

/// Learned tax: a monotone base PWL per facility plus the eps-slope term, so
/// the applied tax is tau_f(u) = base_f(u) + eps * u.
struct TaxPlan {
  std::vector<PiecewiseLinear> base;
  double eps = 0.0;

  std::vector<PiecewiseLinear> applied() const;
  double applied_value(int f, double u) const;
};

struct DesignerState {
  Grid grid{1};
  double eps = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  int round = 0;
  TaxPlan plan;
  std::vector<KnownIndexSet> known;

  int resolution() const { return grid.resolution(); }
  double spacing() const { return grid.spacing(); }
  std::size_t known_total() const;
};

/// K = ceil(2 beta / eps), Delta = 1/K, delta = eps Delta^2 / 8, base taxes
/// {(0,0),(1,beta)} and K_f = {0}.
DesignerState init_designer(int facility_count, double eps, double beta);

struct Classification {
  std::vector<int> known;
  std::vector<int> unknown;
};

/// Facility f is known when both grid neighbours of y_f are in K_f.
Classification classify_facilities(const DesignerState& state, std::span<const double> y);

/// [l_f, r_f] built from the applied tax at the known neighbours of y_f.
TaxRange feasible_range(const DesignerState& state, int f, double y_f);

/// Stores the clipped two-point estimate u (c - c_dot) / (y - y_dot) at every
/// grid neighbour of y that is not yet known, and marks those points known.
/// Returns the grid points that were added.
std::vector<double> update_tax(DesignerState& state, int f, double y, double y_dot, double c,
                               double c_dot);

enum class Termination {
  kSubroutineFalse,
  kRoundBudgetExhausted,
  kAbortedDegenerate,
  kAbortedLocality,
};
const char* to_string(Termination t);

/// Equilibrium feedback for an applied tax profile.
using EquilibriumOracle = std::function<EquilibriumFeedback(std::span<const PiecewiseLinear>)>;

struct RunOptions {
  double eps = 0.05;
  double beta = 1.0;
  // 0 selects max(ceil(2 F beta / eps) + F, K F + 1).
  int t_max = 0;
  // Feed the solver's own strategy to the exploratory search instead of
  // decomposing the load.
  bool reuse_solver_strategy = false;
  // Tolerance the oracle certifies; used for the locality band.
  double tol_eq = 1e-8;
  bool record_snapshots = true;
  ExploreOptions explore;
};

struct ProbeRecord {
  int facility = -1;
  int sign = 0;
  ExploreBranch branch = ExploreBranch::kCertified;
  double tax_value = 0.0;
  LoadVector load;
  CostVector cost;
  double displacement = 0.0;
  bool retried = false;
  std::vector<double> added;
};

struct RoundRecord {
  int round = 0;
  LoadVector load;
  CostVector cost;
  double social_cost = 0.0;
  double certified_eps = 0.0;
  int queries = 0;
  std::vector<int> unknown;
  std::optional<ProbeRecord> probe;
  std::size_t known_total_before = 0;
  std::size_t known_total_after = 0;
  // Base taxes and known sets in force when the round's primary query ran.
  std::vector<PiecewiseLinear> base_snapshot;
  std::vector<std::vector<double>> known_snapshot;
  // Inputs of the exploratory search, kept with the snapshots.
  Strategy strategy;
  TaxVector tax_at_load;
  std::vector<TaxRange> ranges;
  std::string diagnostic;
};

struct RunResult {
  TaxPlan plan;
  DesignerState state;
  int rounds = 0;
  int queries = 0;
  Termination termination = Termination::kRoundBudgetExhausted;
  LoadVector final_load;
  double final_social_cost = 0.0;
  std::vector<RoundRecord> trace;
  std::string diagnostic;
};

int default_round_budget(int facility_count, double eps, double beta);

/// Smallest beta the guarantees cover: the smoothness of every cost, and the
/// value u c'(u) at u = 1 that the initial tax {(0,0),(1,beta)} must dominate.
double guarantee_beta(const Game& game);

/// Main learning loop. Each round queries the oracle at the current tax,
/// searches for an exploratory tax and, unless certified, queries once more at
/// the perturbed tax and updates the estimate.
RunResult run(const Game& game, const EquilibriumOracle& oracle, const RunOptions& options);

/// Default oracle: solve_equilibrium with tol_eq = min(1e-8, delta / 100).
EquilibriumOracle make_solver_oracle(const Game& game, SolverConfig cfg);
double default_tol_eq(double eps, double beta);

}  // namespace taxlearn
