#include "taxlearn/taxdesign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "taxlearn/errors.hpp"

namespace taxlearn {
namespace {

constexpr int kMaxResolution = 10'000'000;

int grid_resolution(double eps, double beta) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ArgumentError("designer: eps must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ArgumentError("designer: beta must be positive");
  // Shave a relative 1e-12 so that 2*beta/eps landing a rounding error above
  // an integer does not add a grid point.
  const double q = 2.0 * beta / eps;
  const double k = std::ceil(q * (1.0 - 1e-12));
  if (k > kMaxResolution) throw ArgumentError("designer: grid resolution 2*beta/eps too large");
  return std::max(1, static_cast<int>(k));
}

double unit(double y) { return std::clamp(y, 0.0, 1.0); }

std::vector<PiecewiseLinear> probe_taxes(const std::vector<PiecewiseLinear>& applied,
                                         std::span<const double> y, const ExploreOutcome& probe,
                                         double delta, int sign) {
  std::vector<PiecewiseLinear> out;
  out.reserve(applied.size());
  for (std::size_t f = 0; f < applied.size(); ++f) {
    double value = probe.tax[f];
    if (static_cast<int>(f) == probe.facility) value += sign * delta;
    PiecewiseLinear base(std::vector<PiecewiseLinear::Breakpoint>(applied[f].breakpoints().begin(),
                                                                  applied[f].breakpoints().end()));
    out.push_back(base.update(unit(y[f]), value));
  }
  return out;
}

}  // namespace

std::vector<PiecewiseLinear> TaxPlan::applied() const {
  std::vector<PiecewiseLinear> out;
  out.reserve(base.size());
  for (const PiecewiseLinear& b : base) out.push_back(b.plus_linear(eps));
  return out;
}

double TaxPlan::applied_value(int f, double u) const {
  return base.at(static_cast<std::size_t>(f))(u) + eps * u;
}

std::size_t DesignerState::known_total() const {
  std::size_t total = 0;
  for (const KnownIndexSet& k : known) total += k.size();
  return total;
}

DesignerState init_designer(int facility_count, double eps, double beta) {
  if (facility_count < 1) throw ArgumentError("designer: need at least one facility");
  DesignerState s;
  s.grid = Grid(grid_resolution(eps, beta));
  s.eps = eps;
  s.beta = beta;
  s.delta = eps * s.grid.spacing() * s.grid.spacing() / 8.0;
  s.plan.eps = eps;
  for (int f = 0; f < facility_count; ++f) {
    s.plan.base.push_back(PiecewiseLinear::line(0.0, beta, true));
    s.known.emplace_back(s.grid);
  }
  return s;
}

Classification classify_facilities(const DesignerState& state, std::span<const double> y) {
  Classification out;
  for (std::size_t f = 0; f < y.size(); ++f) {
    const KnownIndexSet& k = state.known.at(f);
    const double u = unit(y[f]);
    const int snapped = state.grid.snapped_index(u);
    const bool known = snapped >= 0
                           ? k.contains_index(snapped)
                           : k.contains_index(state.grid.floor_index(u)) &&
                                 k.contains_index(state.grid.ceil_index(u));
    (known ? out.known : out.unknown).push_back(static_cast<int>(f));
  }
  return out;
}

TaxRange feasible_range(const DesignerState& state, int f, double y_f) {
  const double y = unit(y_f);
  const KnownIndexSet& k = state.known.at(static_cast<std::size_t>(f));
  const double below = k.floor(y);
  const double above = k.ceil(y, true);
  return {state.plan.applied_value(f, below) + state.eps * (y - below),
          state.plan.applied_value(f, above) + state.eps * (y - above)};
}

std::vector<double> update_tax(DesignerState& state, int f, double y, double y_dot, double c,
                               double c_dot) {
  y = unit(y);
  if (!(y != y_dot)) throw ArgumentError("update_tax: perturbed load equals the original load");
  auto& known = state.known.at(static_cast<std::size_t>(f));
  auto& base = state.plan.base.at(static_cast<std::size_t>(f));
  const Grid& grid = state.grid;

  std::vector<int> candidates;
  if (const int s = grid.snapped_index(y); s >= 0) {
    candidates.push_back(s);
  } else {
    candidates.push_back(grid.floor_index(y));
    candidates.push_back(grid.ceil_index(y));
  }
  std::erase_if(candidates, [&](int i) { return known.contains_index(i); });
  if (candidates.empty()) throw ContractError("update_tax: facility is already known at its load");

  const double lo = base(known.floor(y));
  const double hi = base(known.ceil(y, true));
  const double slope = (c - c_dot) / (y - y_dot);
  std::vector<double> added;
  for (int i : candidates) {
    const double u = grid.point(i);
    base = base.update(u, clip(u * slope, lo, hi));
    known.insert_index(i);
    added.push_back(u);
  }
  return added;
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kSubroutineFalse:
      return "subroutine_false";
    case Termination::kRoundBudgetExhausted:
      return "round_budget_exhausted";
    case Termination::kAbortedDegenerate:
      return "aborted_degenerate";
    case Termination::kAbortedLocality:
      return "aborted_locality";
  }
  return "unknown";
}

int default_round_budget(int facility_count, double eps, double beta) {
  const int K = grid_resolution(eps, beta);
  const double theorem = std::ceil(2.0 * facility_count * beta / eps * (1.0 - 1e-12));
  return std::max(static_cast<int>(theorem) + facility_count, K * facility_count + 1);
}

double guarantee_beta(const Game& game) {
  double beta = game.smoothness();
  for (const CostFunction& c : game.costs()) beta = std::max(beta, c.derivative(1.0));
  return beta;
}

double default_tol_eq(double eps, double beta) {
  const double spacing = 1.0 / grid_resolution(eps, beta);
  const double delta = eps * spacing * spacing / 8.0;
  return std::min(1e-8, delta / 100.0);
}

EquilibriumOracle make_solver_oracle(const Game& game, SolverConfig cfg) {
  return [&game, cfg](std::span<const PiecewiseLinear> taxes) {
    return solve_equilibrium(game, taxes, cfg);
  };
}

RunResult run(const Game& game, const EquilibriumOracle& oracle, const RunOptions& options) {
  const int F = game.facility_count();
  RunResult result;
  result.state = init_designer(F, options.eps, options.beta);
  DesignerState& state = result.state;
  const int budget = options.t_max > 0 ? options.t_max
                                       : default_round_budget(F, options.eps, options.beta);
  const double band = state.spacing() + 4.0 * std::sqrt(2.0 * options.tol_eq / options.eps);

  auto finish = [&](Termination kind, const LoadVector& load) {
    result.termination = kind;
    result.plan = state.plan;
    result.final_load = load;
    result.final_social_cost = social_cost(game, load);
    return result;
  };

  for (int t = 1; t <= budget; ++t) {
    state.round = t;
    RoundRecord rec;
    rec.round = t;
    rec.known_total_before = state.known_total();
    if (options.record_snapshots) {
      rec.base_snapshot = state.plan.base;
      for (const KnownIndexSet& k : state.known) rec.known_snapshot.push_back(k.points());
    }
    const std::vector<PiecewiseLinear> applied = state.plan.applied();
    const EquilibriumFeedback fb = oracle(applied);
    ++result.queries;
    rec.queries = 1;
    rec.load = fb.load;
    rec.cost = fb.cost;
    rec.social_cost = social_cost(game, fb.load);
    rec.certified_eps = fb.certified_eps;
    result.rounds = t;

    const Classification cls = classify_facilities(state, fb.load);
    rec.unknown = cls.unknown;
    std::vector<TaxRange> ranges(static_cast<std::size_t>(F));
    TaxVector tau(static_cast<std::size_t>(F));
    for (int f = 0; f < F; ++f) {
      tau[static_cast<std::size_t>(f)] = applied[static_cast<std::size_t>(f)](unit(fb.load[static_cast<std::size_t>(f)]));
    }
    for (int f : cls.unknown) ranges[static_cast<std::size_t>(f)] = feasible_range(state, f, fb.load[static_cast<std::size_t>(f)]);

    const Strategy x = options.reuse_solver_strategy
                           ? fb.strategy
                           : decompose(game, fb.load, fb.commodity_loads);
    ExploreOptions explore = options.explore;
    explore.gap_tol = std::max(explore.gap_tol, 2.0 * fb.certified_eps);
    const ExploreOutcome outcome =
        find_exploratory_tax(game, x, fb.load, fb.cost, tau, cls.unknown, ranges, explore);
    if (options.record_snapshots) {
      rec.strategy = x;
      rec.tax_at_load = tau;
      rec.ranges = ranges;
    }

    if (outcome.certified) {
      rec.known_total_after = rec.known_total_before;
      result.trace.push_back(std::move(rec));
      return finish(Termination::kSubroutineFalse, fb.load);
    }

    const int f = outcome.facility;
    const auto fi = static_cast<std::size_t>(f);
    ProbeRecord probe;
    probe.facility = f;
    probe.sign = outcome.sign;
    probe.branch = outcome.branch;
    probe.tax_value = outcome.tax[fi];

    EquilibriumFeedback perturbed = oracle(probe_taxes(applied, fb.load, outcome, state.delta, outcome.sign));
    ++result.queries;
    ++rec.queries;
    double displacement = std::abs(fb.load[fi] - perturbed.load[fi]);
    auto degenerate = [&](const EquilibriumFeedback& other, double d) {
      const double noise = std::max(fb.certified_eps, other.certified_eps);
      return d < 10.0 * noise / options.eps + 1e-14;
    };
    if (degenerate(perturbed, displacement)) {
      probe.retried = true;
      probe.sign = -outcome.sign;
      perturbed = oracle(probe_taxes(applied, fb.load, outcome, state.delta, probe.sign));
      ++result.queries;
      ++rec.queries;
      displacement = std::abs(fb.load[fi] - perturbed.load[fi]);
    }
    probe.load = perturbed.load;
    probe.cost = perturbed.cost;
    probe.displacement = displacement;

    char msg[200];
    if (degenerate(perturbed, displacement)) {
      std::snprintf(msg, sizeof msg,
                    "round %d: perturbing facility %d moved its load by only %.3g in both directions",
                    t, f, displacement);
      rec.diagnostic = result.diagnostic = msg;
      rec.known_total_after = rec.known_total_before;
      rec.probe = std::move(probe);
      result.trace.push_back(std::move(rec));
      return finish(Termination::kAbortedDegenerate, fb.load);
    }
    if (displacement > band) {
      std::snprintf(msg, sizeof msg,
                    "round %d: perturbing facility %d moved its load by %.6g, beyond the locality "
                    "band %.6g",
                    t, f, displacement, band);
      rec.diagnostic = result.diagnostic = msg;
      rec.known_total_after = rec.known_total_before;
      rec.probe = std::move(probe);
      result.trace.push_back(std::move(rec));
      return finish(Termination::kAbortedLocality, fb.load);
    }

    probe.added = update_tax(state, f, fb.load[fi], perturbed.load[fi], fb.cost[fi], perturbed.cost[fi]);
    rec.known_total_after = state.known_total();
    rec.probe = std::move(probe);
    result.trace.push_back(std::move(rec));
  }

  // Budget spent: report the load the final plan induces.
  const EquilibriumFeedback last = oracle(state.plan.applied());
  ++result.queries;
  return finish(Termination::kRoundBudgetExhausted, last.load);
}

}  // namespace taxlearn
