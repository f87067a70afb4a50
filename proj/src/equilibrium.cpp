#include "taxlearn/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "taxlearn/errors.hpp"

namespace taxlearn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kBisectionSteps = 200;

class TaxedCost {
 public:
  TaxedCost(const Game& game, std::span<const PiecewiseLinear> taxes)
      : game_(game), taxes_(taxes) {}

  double operator()(int f, double u) const {
    u = std::clamp(u, 0.0, 1.0);
    double v = game_.cost(f).value(u);
    if (!taxes_.empty()) v += taxes_[static_cast<std::size_t>(f)](u);
    return v;
  }

  CostVector at(std::span<const double> y) const {
    CostVector g(y.size());
    for (std::size_t f = 0; f < y.size(); ++f) g[f] = (*this)(static_cast<int>(f), y[f]);
    return g;
  }

 private:
  const Game& game_;
  std::span<const PiecewiseLinear> taxes_;
};

LoadVector raw_loads(const Game& game, const Strategy& x) {
  LoadVector y(static_cast<std::size_t>(game.facility_count()), 0.0);
  for (const auto& flows : x) {
    for (const ActionFlow& flow : flows) {
      for (int f : flow.action) y[static_cast<std::size_t>(f)] += flow.weight;
    }
  }
  return y;
}

// Position of `action` in the commodity's flow list, adding an empty entry
// when it is new.
std::size_t locate(std::vector<ActionFlow>& flows, const BestResponse& br) {
  for (std::size_t k = 0; k < flows.size(); ++k) {
    if (br.index >= 0 ? flows[k].index == br.index : flows[k].action == br.action) return k;
  }
  flows.push_back({br.action, 0.0, br.index});
  return flows.size() - 1;
}

// Root of a non-decreasing function on [0, hi], given d(0) < 0.
template <class F>
double bisect(F&& d, double hi) {
  if (d(hi) <= 0.0) return hi;
  double lo = 0.0;
  for (int k = 0; k < kBisectionSteps; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (d(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

struct Certificate {
  double residual = 0.0;
  double fw_gap = 0.0;
};

Certificate certify(const Game& game, const Strategy& x, std::span<const double> g) {
  Certificate cert;
  for (int i = 0; i < game.commodity_count(); ++i) {
    const double cheapest = best_response(game, i, g).cost;
    for (const ActionFlow& flow : x[static_cast<std::size_t>(i)]) {
      if (flow.weight <= 0.0) continue;
      const double excess = action_cost(flow.action, g) - cheapest;
      cert.residual = std::max(cert.residual, excess);
      cert.fw_gap += flow.weight * excess;
    }
  }
  return cert;
}

void drop_empty_paths(const Game& game, Strategy& x) {
  if (!game.is_network()) return;
  for (auto& flows : x) {
    std::erase_if(flows, [](const ActionFlow& a) { return a.weight <= 0.0; });
  }
}

EquilibriumFeedback package(const Game& game, Strategy x, double residual, int iterations) {
  drop_empty_paths(game, x);
  EquilibriumFeedback fb;
  fb.commodity_loads = commodity_loads(game, x);
  fb.load = facility_load(game, x);
  fb.cost = facility_costs(game, fb.load);
  fb.strategy = std::move(x);
  fb.certified_eps = residual;
  fb.iterations = iterations;
  return fb;
}

// One block step per commodity: shift mass from the dearest in-support action
// to the best response with an exact line search.
bool pairwise_sweep(const Game& game, const TaxedCost& taxed, Strategy& x, LoadVector& y) {
  bool moved = false;
  for (int i = 0; i < game.commodity_count(); ++i) {
    auto& flows = x[static_cast<std::size_t>(i)];
    const CostVector g = taxed.at(y);
    const BestResponse br = best_response(game, i, g);
    const std::size_t s = locate(flows, br);
    std::size_t v = flows.size();
    double worst = -kInf;
    for (std::size_t k = 0; k < flows.size(); ++k) {
      if (flows[k].weight <= 0.0) continue;
      const double cost = action_cost(flows[k].action, g);
      if (cost > worst) {
        worst = cost;
        v = k;
      }
    }
    if (v == flows.size() || v == s || !(worst > br.cost)) continue;

    std::vector<int> gain_side;
    std::vector<int> lose_side;
    for (int f : flows[s].action) {
      if (!contains_facility(flows[v].action, f)) gain_side.push_back(f);
    }
    for (int f : flows[v].action) {
      if (!contains_facility(flows[s].action, f)) lose_side.push_back(f);
    }
    auto slope = [&](double t) {
      double d = 0.0;
      for (int f : gain_side) d += taxed(f, y[static_cast<std::size_t>(f)] + t);
      for (int f : lose_side) d -= taxed(f, y[static_cast<std::size_t>(f)] - t);
      return d;
    };
    const double mass = flows[v].weight;
    const double t = bisect(slope, mass);
    if (!(t > 0.0)) continue;
    for (int f : gain_side) y[static_cast<std::size_t>(f)] += t;
    for (int f : lose_side) y[static_cast<std::size_t>(f)] -= t;
    flows[s].weight += t;
    flows[v].weight = t >= mass ? 0.0 : mass - t;
    moved = true;
  }
  drop_empty_paths(game, x);
  return moved;
}

// Joint Frank-Wolfe step towards the all-best-response strategy.
bool classic_step(const Game& game, const TaxedCost& taxed, Strategy& x, LoadVector& y) {
  const CostVector g = taxed.at(y);
  std::vector<BestResponse> responses;
  LoadVector target(y.size(), 0.0);
  for (int i = 0; i < game.commodity_count(); ++i) {
    responses.push_back(best_response(game, i, g));
    for (int f : responses.back().action) {
      target[static_cast<std::size_t>(f)] += game.commodity(i).weight;
    }
  }
  LoadVector dir(y.size());
  for (std::size_t f = 0; f < y.size(); ++f) dir[f] = target[f] - y[f];
  auto slope = [&](double gamma) {
    double d = 0.0;
    for (std::size_t f = 0; f < y.size(); ++f) {
      if (dir[f] != 0.0) d += taxed(static_cast<int>(f), y[f] + gamma * dir[f]) * dir[f];
    }
    return d;
  };
  if (!(slope(0.0) < 0.0)) return false;
  const double gamma = bisect(slope, 1.0);
  if (!(gamma > 0.0)) return false;
  for (int i = 0; i < game.commodity_count(); ++i) {
    auto& flows = x[static_cast<std::size_t>(i)];
    const std::size_t s = locate(flows, responses[static_cast<std::size_t>(i)]);
    for (ActionFlow& flow : flows) flow.weight *= (1.0 - gamma);
    flows[s].weight += gamma * game.commodity(i).weight;
  }
  drop_empty_paths(game, x);
  y = raw_loads(game, x);
  return true;
}

Strategy initial_strategy(const Game& game, const TaxedCost& taxed) {
  if (!game.is_network()) return uniform_strategy(game);
  const LoadVector zero(static_cast<std::size_t>(game.facility_count()), 0.0);
  const CostVector g = taxed.at(zero);
  Strategy x(static_cast<std::size_t>(game.commodity_count()));
  for (int i = 0; i < game.commodity_count(); ++i) {
    BestResponse br = best_response(game, i, g);
    x[static_cast<std::size_t>(i)].push_back({std::move(br.action), game.commodity(i).weight, -1});
  }
  return x;
}

}  // namespace

EquilibriumFeedback solve_equilibrium(const Game& game, std::span<const PiecewiseLinear> taxes,
                                      const SolverConfig& cfg, const Strategy* warm_start) {
  if (!(cfg.tol_eq > 0.0)) throw ArgumentError("solver: tol_eq must be positive");
  if (cfg.max_iters < 1) throw ArgumentError("solver: max_iters must be positive");
  if (!taxes.empty() && static_cast<int>(taxes.size()) != game.facility_count()) {
    throw ArgumentError("solver: one tax per facility required");
  }
  const TaxedCost taxed(game, taxes);
  Strategy x = warm_start ? *warm_start : initial_strategy(game, taxed);
  check_feasible(game, x);

  const double target = cfg.tol_eq * cfg.polish_factor;
  std::vector<SolverTraceRow> trace;
  Strategy best = x;
  double best_residual = kInf;
  bool stalled = false;
  LoadVector y = raw_loads(game, x);

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    if (cfg.step_rule == StepRule::kPairwise) y = raw_loads(game, x);
    const CostVector g = taxed.at(y);
    const Certificate cert = certify(game, x, g);
    if (cfg.record_trace) {
      LoadVector clamped = y;
      for (double& v : clamped) v = std::clamp(v, 0.0, 1.0);
      trace.push_back({iter, potential(game, taxes, clamped), cert.fw_gap, cert.residual});
    }
    if (cert.residual < best_residual) {
      best_residual = cert.residual;
      best = x;
    }
    const bool polished = cert.residual <= target && cert.fw_gap <= cfg.tol_eq;
    if (polished || (stalled && cert.residual <= cfg.tol_eq)) {
      EquilibriumFeedback fb = package(game, std::move(x), cert.residual, iter);
      fb.trace = std::move(trace);
      return fb;
    }
    const bool moved = cfg.step_rule == StepRule::kPairwise ? pairwise_sweep(game, taxed, x, y)
                                                            : classic_step(game, taxed, x, y);
    stalled = !moved;
  }
  EquilibriumFeedback fb = package(game, std::move(best), best_residual, cfg.max_iters);
  fb.trace = std::move(trace);
  char msg[160];
  std::snprintf(msg, sizeof msg,
                "solver: no %.3g-equilibrium within %d iterations (best residual %.3g)",
                cfg.tol_eq, cfg.max_iters, best_residual);
  throw SolverError(msg, std::move(fb));
}

void write_solver_trace_csv(std::ostream& out, std::span<const SolverTraceRow> trace) {
  out << "iteration,potential,fw_gap,residual\n";
  char line[160];
  for (const SolverTraceRow& r : trace) {
    std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.12g\n", r.iteration, r.potential, r.fw_gap,
                  r.residual);
    out << line;
  }
}

}  // namespace taxlearn
