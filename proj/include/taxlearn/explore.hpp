#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "taxlearn/game.hpp"

namespace taxlearn {

/// Feasible interval [lower, upper] for the probe tax value at an unknown facility.
struct TaxRange {
  double lower = 0.0;
  double upper = 0.0;
};

/// Gap_j(x, c + tau^u) as a function of the tax value u on one facility:
///   min(off_without, u + off_with) - max(in_without, u + in_with)
/// where the `with` terms are action costs excluding that facility's tax.
/// Missing action classes are ±∞.
struct GapProfile {
  double in_without = -std::numeric_limits<double>::infinity();
  double in_with = -std::numeric_limits<double>::infinity();
  double off_without = std::numeric_limits<double>::infinity();
  double off_with = std::numeric_limits<double>::infinity();

  double operator()(double u) const;
  // sup / inf of {u : gap(u) >= 0}. Throws ContractError when the set is
  // empty beyond `tol`, i.e. x is not an equilibrium for any u.
  double upper(double tol) const;
  double lower(double tol) const;
};

/// Closed-form gap profile for commodity j when the tax on facility f varies
/// and every other facility keeps tau_prime. Enumerates the action set.
GapProfile gap_under_test_tax(const Game& game, const Strategy& x, std::span<const double> cost,
                              std::span<const double> tau_prime, int j, int f);

enum class SweepDirection { kRaise, kLower };

/// Network fast path for sup{u : Gap_j >= 0} (raise) or inf (lower) when the
/// tax on edge f varies. Requires f to carry all or none of commodity j's flow.
double network_gap_sweep(const Game& game, const Strategy& x, std::span<const double> cost,
                         std::span<const double> tau_prime, int j, int f, SweepDirection direction,
                         double tol);

/// Strategy with facility_load(x) = y. Explicit games solve the feasibility LP;
/// network games split each commodity's edge load into paths, which requires
/// `per_commodity` unless the game has a single commodity.
Strategy decompose(const Game& game, std::span<const double> y,
                   std::span<const LoadVector> per_commodity = {});

enum class ExploreBranch { kSplitCommodity, kCertified, kRaise, kLower };
const char* to_string(ExploreBranch branch);

enum class ExploreEngine { kAuto, kEnumeration, kNetwork };

struct ExploreOptions {
  ExploreEngine engine = ExploreEngine::kAuto;
  // Gaps down to -gap_tol count as non-negative.
  double gap_tol = 1e-12;
};

/// Result of the exploratory-tax search. When `certified` is false, `tax` is
/// the probe tax vector, `facility` the probed facility and `sign` the
/// perturbation direction.
struct ExploreOutcome {
  bool certified = false;
  TaxVector tax;
  int facility = -1;
  int sign = 0;
  ExploreBranch branch = ExploreBranch::kCertified;
  int commodity = -1;
  std::vector<int> swept;
  std::vector<double> solved;
};

ExploreOutcome find_exploratory_tax(const Game& game, const Strategy& x, std::span<const double> y,
                                    std::span<const double> cost, std::span<const double> tau,
                                    std::span<const int> unknown, std::span<const TaxRange> ranges,
                                    const ExploreOptions& options = {});

}  // namespace taxlearn
