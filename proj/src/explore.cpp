#include "taxlearn/explore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "taxlearn/errors.hpp"
#include "taxlearn/simplex.hpp"

namespace taxlearn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kReconstructTol = 1e-8;

std::vector<double> plus(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + b[k];
  return out;
}

double max_support_cost(const Strategy& x, int j, std::span<const double> w) {
  double m = -kInf;
  for (const ActionFlow& flow : x[static_cast<std::size_t>(j)]) {
    if (flow.weight > kSupportTol) m = std::max(m, action_cost(flow.action, w));
  }
  return m;
}

// Gap_i(x, c + tau) < -tol, answered with one shortest path on networks.
bool worst_case_violated(const Game& game, const Strategy& x, std::span<const double> cost,
                         std::span<const double> tau, int i, bool use_network, double tol) {
  const std::vector<double> w = plus(cost, tau);
  if (!use_network) return gap(game, i, x, w) < -tol;
  const Commodity& c = game.commodity(i);
  const double shortest = net::shortest_path(game.network(), w, c.source, c.target).length;
  return shortest < max_support_cost(x, i, w) - tol;
}

}  // namespace

const char* to_string(ExploreBranch branch) {
  switch (branch) {
    case ExploreBranch::kSplitCommodity:
      return "split_commodity";
    case ExploreBranch::kCertified:
      return "certified";
    case ExploreBranch::kRaise:
      return "raise";
    case ExploreBranch::kLower:
      return "lower";
  }
  return "unknown";
}

double GapProfile::operator()(double u) const {
  return std::min(off_without, u + off_with) - std::max(in_without, u + in_with);
}

double GapProfile::upper(double tol) const {
  if (off_without - in_without < -tol || off_with - in_with < -tol) {
    throw ContractError("gap profile: strategy is not an equilibrium at the current tax");
  }
  return off_without - in_with;
}

double GapProfile::lower(double tol) const {
  if (off_without - in_without < -tol || off_with - in_with < -tol) {
    throw ContractError("gap profile: strategy is not an equilibrium at the current tax");
  }
  return in_without - off_with;
}

GapProfile gap_under_test_tax(const Game& game, const Strategy& x, std::span<const double> cost,
                              std::span<const double> tau_prime, int j, int f) {
  std::vector<double> w = plus(cost, tau_prime);
  // Facility f enters every action cost through u alone.
  w[static_cast<std::size_t>(f)] = cost[static_cast<std::size_t>(f)];
  std::vector<Action> support;
  GapProfile profile;
  for (const ActionFlow& flow : x.at(static_cast<std::size_t>(j))) {
    if (flow.weight <= kSupportTol) continue;
    support.push_back(flow.action);
    if (!game.is_network()) std::sort(support.back().begin(), support.back().end());
    const double v = action_cost(flow.action, w);
    if (contains_facility(flow.action, f)) {
      profile.in_with = std::max(profile.in_with, v);
    } else {
      profile.in_without = std::max(profile.in_without, v);
    }
  }
  for (const Action& a : game.action_set(j)) {
    if (std::find(support.begin(), support.end(), a) != support.end()) continue;
    const double v = action_cost(a, w);
    if (contains_facility(a, f)) {
      profile.off_with = std::min(profile.off_with, v);
    } else {
      profile.off_without = std::min(profile.off_without, v);
    }
  }
  return profile;
}

Strategy decompose(const Game& game, std::span<const double> y,
                   std::span<const LoadVector> per_commodity) {
  const int F = game.facility_count();
  if (static_cast<int>(y.size()) != F) throw ArgumentError("decompose: load size mismatch");
  Strategy x(static_cast<std::size_t>(game.commodity_count()));

  if (game.is_network()) {
    if (per_commodity.empty() && game.commodity_count() != 1) {
      throw ArgumentError("decompose: multi-commodity networks need per-commodity loads");
    }
    for (int i = 0; i < game.commodity_count(); ++i) {
      const Commodity& c = game.commodity(i);
      std::span<const double> load = per_commodity.empty() ? y : per_commodity[static_cast<std::size_t>(i)];
      for (auto& p : net::flow_decompose(game.network(), load, c.source, c.target, c.weight)) {
        x[static_cast<std::size_t>(i)].push_back({std::move(p.path), p.weight, -1});
      }
    }
    return x;
  }

  const int m = game.commodity_count();
  std::size_t columns = 0;
  for (int i = 0; i < m; ++i) columns += game.commodity(i).actions.size();
  std::vector<std::vector<double>> A(static_cast<std::size_t>(F + m), std::vector<double>(columns, 0.0));
  std::vector<double> b(static_cast<std::size_t>(F + m), 0.0);
  for (int f = 0; f < F; ++f) b[static_cast<std::size_t>(f)] = y[static_cast<std::size_t>(f)];
  std::size_t col = 0;
  for (int i = 0; i < m; ++i) {
    b[static_cast<std::size_t>(F + i)] = game.commodity(i).weight;
    for (const Action& a : game.commodity(i).actions) {
      for (int f : a) A[static_cast<std::size_t>(f)][col] = 1.0;
      A[static_cast<std::size_t>(F + i)][col] = 1.0;
      ++col;
    }
  }
  const auto solution = find_feasible_point(A, b);
  if (!solution) throw DecompositionError("decompose: load is not induced by any strategy");
  col = 0;
  for (int i = 0; i < m; ++i) {
    const auto& actions = game.commodity(i).actions;
    for (std::size_t a = 0; a < actions.size(); ++a) {
      x[static_cast<std::size_t>(i)].push_back({actions[a], (*solution)[col++], static_cast<int>(a)});
    }
  }
  for (std::size_t r = 0; r < A.size(); ++r) {
    double lhs = 0.0;
    for (std::size_t c = 0; c < columns; ++c) lhs += A[r][c] * (*solution)[c];
    if (std::abs(lhs - b[r]) > kReconstructTol) {
      throw DecompositionError("decompose: reconstruction residual " + std::to_string(lhs - b[r]));
    }
  }
  return x;
}

ExploreOutcome find_exploratory_tax(const Game& game, const Strategy& x, std::span<const double> y,
                                    std::span<const double> cost, std::span<const double> tau,
                                    std::span<const int> unknown, std::span<const TaxRange> ranges,
                                    const ExploreOptions& options) {
  const auto F = static_cast<std::size_t>(game.facility_count());
  if (y.size() != F || cost.size() != F || tau.size() != F || ranges.size() != F) {
    throw ArgumentError("explore: vector sizes must equal the facility count");
  }
  const bool use_network = options.engine == ExploreEngine::kNetwork ||
                           (options.engine == ExploreEngine::kAuto && game.is_network());
  if (use_network && !game.is_network()) {
    throw ArgumentError("explore: network engine requested for an explicit game");
  }
  std::vector<int> order(unknown.begin(), unknown.end());
  std::sort(order.begin(), order.end());
  const auto yi = commodity_loads(game, x);
  const int m = game.commodity_count();

  ExploreOutcome out;
  // A commodity split across an unknown facility: the current tax already probes it.
  for (int f : order) {
    for (int i = 0; i < m; ++i) {
      const double load = yi[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)];
      if (load > kSupportTol && load < game.commodity(i).weight - kSupportTol) {
        out.tax.assign(tau.begin(), tau.end());
        out.facility = f;
        out.sign = 1;
        out.branch = ExploreBranch::kSplitCommodity;
        out.commodity = i;
        return out;
      }
    }
  }

  std::vector<std::vector<int>> full(static_cast<std::size_t>(m));
  std::vector<std::vector<int>> empty(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    for (int f : order) {
      const double load = yi[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)];
      (load >= game.commodity(i).weight - kSupportTol ? full : empty)[static_cast<std::size_t>(i)]
          .push_back(f);
    }
  }

  int target = -1;
  for (int i = 0; i < m && target < 0; ++i) {
    std::vector<double> worst(tau.begin(), tau.end());
    for (int f : full[static_cast<std::size_t>(i)]) worst[static_cast<std::size_t>(f)] = ranges[static_cast<std::size_t>(f)].upper;
    for (int f : empty[static_cast<std::size_t>(i)]) worst[static_cast<std::size_t>(f)] = ranges[static_cast<std::size_t>(f)].lower;
    if (worst_case_violated(game, x, cost, worst, i, use_network, options.gap_tol)) target = i;
  }
  if (target < 0) {
    out.certified = true;
    out.branch = ExploreBranch::kCertified;
    return out;
  }
  out.commodity = target;

  auto boundary = [&](const std::vector<double>& tau_prime, int f, SweepDirection dir) {
    double u = dir == SweepDirection::kRaise ? kInf : -kInf;
    for (int j = 0; j < m; ++j) {
      double uj;
      if (use_network) {
        uj = network_gap_sweep(game, x, cost, tau_prime, j, f, dir, options.gap_tol);
      } else {
        const GapProfile p = gap_under_test_tax(game, x, cost, tau_prime, j, f);
        uj = dir == SweepDirection::kRaise ? p.upper(options.gap_tol) : p.lower(options.gap_tol);
      }
      u = dir == SweepDirection::kRaise ? std::min(u, uj) : std::max(u, uj);
    }
    return u;
  };

  std::vector<double> tau_prime(tau.begin(), tau.end());
  for (int f : full[static_cast<std::size_t>(target)]) {
    const double u = boundary(tau_prime, f, SweepDirection::kRaise);
    out.swept.push_back(f);
    out.solved.push_back(u);
    if (u <= ranges[static_cast<std::size_t>(f)].upper) {
      out.tax = tau_prime;
      out.tax[static_cast<std::size_t>(f)] = u;
      out.facility = f;
      out.sign = 1;
      out.branch = ExploreBranch::kRaise;
      return out;
    }
    tau_prime[static_cast<std::size_t>(f)] = ranges[static_cast<std::size_t>(f)].upper;
  }
  for (int f : empty[static_cast<std::size_t>(target)]) {
    const double u = boundary(tau_prime, f, SweepDirection::kLower);
    out.swept.push_back(f);
    out.solved.push_back(u);
    if (u >= ranges[static_cast<std::size_t>(f)].lower) {
      out.tax = tau_prime;
      out.tax[static_cast<std::size_t>(f)] = u;
      out.facility = f;
      out.sign = -1;
      out.branch = ExploreBranch::kLower;
      return out;
    }
    tau_prime[static_cast<std::size_t>(f)] = ranges[static_cast<std::size_t>(f)].lower;
  }
  throw ContractError("explore: sweep reached the worst-case tax without finding a boundary");
}

}  // namespace taxlearn
