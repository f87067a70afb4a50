#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "taxlearn/game.hpp"
#include "taxlearn/taxdesign.hpp"

/// Property checks shared by the `validate` subcommand and the test suite.
namespace taxlearn::oracles {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Random monotone base tax in [0, beta] plus the eps * u term.
std::vector<PiecewiseLinear> random_eps_slope_taxes(int facility_count, double eps, double beta,
                                                     std::mt19937_64& rng);

/// Random feasible strategy: each commodity spreads its weight over a random
/// subset of its explicit actions (or of a few random simple paths).
Strategy random_strategy(const Game& game, std::mt19937_64& rng);

/// Midpoint convexity and eps-strong convexity of the taxed potential on
/// `pairs` random load pairs, to an absolute 1e-10.
PropertyResult check_potential_convexity(const Game& game, double eps, int pairs,
                                         std::mt19937_64& rng);

/// Central differences (h = 1e-5) of the potential against c + tau, to 1e-6.
PropertyResult check_potential_gradient(const Game& game, double eps, int points,
                                        std::mt19937_64& rng);

/// decompose() reproduces the loads of random strategies to 1e-8; network
/// games use at most E paths per commodity.
PropertyResult check_decomposition_roundtrip(const Game& game, int samples, std::mt19937_64& rng);

/// Solver load against equilibrium_by_enumeration under random eps-slope
/// taxes, per coordinate.
PropertyResult check_solver_vs_oracle(const Game& game, double eps, int samples,
                                      std::mt19937_64& rng, double tol = 1e-4);

struct NetworkEquivalenceStats {
  int networks = 0;
  int comparisons = 0;
  int mismatches = 0;
  int non_simple_walks = 0;
  // Of those, how many boundaries would differ from enumeration if the walk
  // length were used directly.
  int walk_disagreements = 0;
  int decompositions = 0;
  int decomposition_failures = 0;
  double max_error = 0.0;
};

/// Random networks with at most `max_vertices` vertices: network_gap_sweep
/// against the enumerated gap profile in both directions for every edge, and
/// flow_decompose round-trips on random multi-path flows. Edges whose two-leg
/// through-edge walk is not simple are counted separately.
NetworkEquivalenceStats network_sweep_equivalence(int networks, int max_vertices, std::uint64_t seed,
                                                  double tol = 1e-9);
PropertyResult check_network_sweep_equivalence(int networks, int max_vertices, std::uint64_t seed);

/// On a certified round, `samples` random taxes drawn inside the recorded
/// ranges keep every commodity gap >= -1e-8.
PropertyResult check_certified_soundness(const Game& game, const RoundRecord& round, int samples,
                                         std::mt19937_64& rng);

struct AuditOptions {
  double eps = 0.05;
  double beta = 1.0;
  double tol_eq = 1e-8;
  // Compare against u c'(u); only meaningful when every cost has a closed form.
  bool analytic_tax = true;
};

/// Per-round guarantees read off a run trace: perturbation locality,
/// known-index and known-facility accuracy, slope floor, known-set growth,
/// query count and the exploratory-round bound.
std::vector<PropertyResult> audit_run(const Game& game, const RunResult& result,
                                      const AuditOptions& options);

struct ValidateOptions {
  double eps = 0.05;
  double beta = 0.0;  // 0 uses the game's smoothness (at least eps)
  std::uint64_t seed = 1;
  int convexity_pairs = 1000;
  int gradient_points = 200;
  int decomposition_samples = 20;
  int solver_samples = 3;
  int soundness_samples = 100;
  bool run_designer = true;
};

/// Whole suite on one game. Oracle-backed checks are skipped, with a note,
/// when the game is too large for them.
std::vector<PropertyResult> validate_game(const Game& game, const ValidateOptions& options);

}  // namespace taxlearn::oracles
