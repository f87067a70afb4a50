#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "taxlearn/game.hpp"
#include "taxlearn/pwl.hpp"

namespace taxlearn {

enum class StepRule {
  kPairwise,  // mass moves from the dearest in-support action to the best response
  kClassic,   // joint Frank-Wolfe step towards the best-response vertex
};

struct SolverConfig {
  double tol_eq = 1e-8;
  int max_iters = 200000;
  StepRule step_rule = StepRule::kPairwise;
  // The solver keeps polishing until the residual drops to tol_eq * polish_factor
  // or stops making progress.
  double polish_factor = 1e-3;
  bool record_trace = false;
};

struct SolverTraceRow {
  int iteration;
  double potential;
  double fw_gap;
  double residual;
};

/// Equilibrium feedback: Nash load and untaxed Nash cost, plus the solver's own
/// strategy (for oracles and tests) and per-commodity loads.
struct EquilibriumFeedback {
  LoadVector load;
  CostVector cost;
  Strategy strategy;
  std::vector<LoadVector> commodity_loads;
  // Largest in-support minus cheapest taxed cost over commodities.
  double certified_eps = 0.0;
  int iterations = 0;
  std::vector<SolverTraceRow> trace;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, EquilibriumFeedback best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const EquilibriumFeedback& best_iterate() const { return best_; }
  double certified_eps() const { return best_.certified_eps; }

 private:
  EquilibriumFeedback best_;
};

/// Minimizes the taxed potential over feasible strategies. `taxes` holds one
/// applied tax per facility, or is empty for the untaxed game.
EquilibriumFeedback solve_equilibrium(const Game& game, std::span<const PiecewiseLinear> taxes,
                                      const SolverConfig& cfg = {},
                                      const Strategy* warm_start = nullptr);

void write_solver_trace_csv(std::ostream& out, std::span<const SolverTraceRow> trace);

}  // namespace taxlearn
