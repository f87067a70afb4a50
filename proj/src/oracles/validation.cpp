#include "taxlearn/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "taxlearn/errors.hpp"
#include "taxlearn/explore.hpp"
#include "taxlearn/oracles.hpp"

namespace taxlearn::oracles {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

LoadVector random_load(int F, std::mt19937_64& rng) {
  LoadVector y(static_cast<std::size_t>(F));
  for (double& v : y) v = uniform(rng);
  return y;
}

double beta_for(const Game& game, double eps) { return std::max(guarantee_beta(game), eps); }

bool same_value(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol;
}

// Random connected instance: vertex 0 reaches vertex V-1.
net::Network random_network(int max_vertices, std::mt19937_64& rng) {
  for (;;) {
    const int V = uniform_int(rng, 3, max_vertices);
    const double density = uniform(rng, 0.25, 0.55);
    std::vector<net::Edge> edges;
    for (int u = 0; u < V; ++u) {
      for (int v = 0; v < V; ++v) {
        if (u == v || v == 0 || u == V - 1) continue;
        if (uniform(rng) < density) edges.push_back({u, v});
      }
    }
    if (edges.empty()) continue;
    if (uniform(rng) < 0.3) edges.push_back(edges[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(edges.size()) - 1))]);
    net::Network network(V, std::move(edges));
    if (network.reachable(0, V - 1)) return network;
  }
}

// Cancels directed cycles in the positive support of an edge flow.
void cancel_cycles(const net::Network& network, std::vector<double>& load) {
  const int V = network.vertex_count();
  for (;;) {
    std::vector<int> state(static_cast<std::size_t>(V), 0);
    std::vector<int> via(static_cast<std::size_t>(V), -1);
    std::vector<int> cycle;
    std::function<bool(int)> dfs = [&](int v) {
      state[static_cast<std::size_t>(v)] = 1;
      for (int e : network.out_edges(v)) {
        if (load[static_cast<std::size_t>(e)] <= 1e-13) continue;
        const int to = network.edge(e).to;
        if (state[static_cast<std::size_t>(to)] == 1) {
          cycle.push_back(e);
          for (int u = v; u != to; u = network.edge(via[static_cast<std::size_t>(u)]).from) {
            cycle.push_back(via[static_cast<std::size_t>(u)]);
          }
          return true;
        }
        if (state[static_cast<std::size_t>(to)] == 0) {
          via[static_cast<std::size_t>(to)] = e;
          if (dfs(to)) return true;
        }
      }
      state[static_cast<std::size_t>(v)] = 2;
      return false;
    };
    bool found = false;
    for (int v = 0; v < V && !found; ++v) {
      if (state[static_cast<std::size_t>(v)] == 0) found = dfs(v);
    }
    if (!found) return;
    double least = kInf;
    for (int e : cycle) least = std::min(least, load[static_cast<std::size_t>(e)]);
    for (int e : cycle) {
      double& y = load[static_cast<std::size_t>(e)];
      y -= least;
      if (y <= 1e-13) y = 0.0;
    }
  }
}

}  // namespace

std::vector<PiecewiseLinear> random_eps_slope_taxes(int facility_count, double eps, double beta,
                                                     std::mt19937_64& rng) {
  std::vector<PiecewiseLinear> taxes;
  for (int f = 0; f < facility_count; ++f) {
    const int interior = uniform_int(rng, 0, 4);
    std::vector<double> xs, ys;
    for (int k = 0; k < interior; ++k) {
      xs.push_back(uniform(rng, 0.01, 0.99));
      ys.push_back(uniform(rng, 0.0, beta));
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    ys.resize(xs.size());
    std::sort(ys.begin(), ys.end());
    std::vector<PiecewiseLinear::Breakpoint> points{{0.0, 0.0}};
    for (std::size_t k = 0; k < xs.size(); ++k) points.push_back({xs[k], ys[k]});
    points.push_back({1.0, std::max(beta, ys.empty() ? 0.0 : ys.back())});
    taxes.push_back(PiecewiseLinear(std::move(points), true).plus_linear(eps));
  }
  return taxes;
}

Strategy random_strategy(const Game& game, std::mt19937_64& rng) {
  Strategy x(static_cast<std::size_t>(game.commodity_count()));
  for (int i = 0; i < game.commodity_count(); ++i) {
    const Commodity& c = game.commodity(i);
    std::vector<ActionFlow> flows;
    if (game.is_network()) {
      // Shortest paths under random weights give a handful of distinct paths.
      std::vector<Action> paths;
      for (int k = 0; k < 4; ++k) {
        std::vector<double> w(static_cast<std::size_t>(game.facility_count()));
        for (double& v : w) v = uniform(rng);
        Action p = net::shortest_path(game.network(), w, c.source, c.target).path;
        if (std::find(paths.begin(), paths.end(), p) == paths.end()) paths.push_back(std::move(p));
      }
      for (Action& p : paths) flows.push_back({std::move(p), uniform(rng, 0.05, 1.0), -1});
    } else {
      for (std::size_t a = 0; a < c.actions.size(); ++a) {
        const double w = uniform(rng) < 0.3 ? 0.0 : uniform(rng, 0.05, 1.0);
        if (w > 0.0) flows.push_back({c.actions[a], w, static_cast<int>(a)});
      }
      if (flows.empty()) flows.push_back({c.actions.front(), 1.0, 0});
    }
    double total = 0.0;
    for (const ActionFlow& f : flows) total += f.weight;
    for (ActionFlow& f : flows) f.weight *= c.weight / total;
    x[static_cast<std::size_t>(i)] = std::move(flows);
  }
  return x;
}

PropertyResult check_potential_convexity(const Game& game, double eps, int pairs,
                                         std::mt19937_64& rng) {
  PropertyResult r{"potential_strong_convexity", true, ""};
  const int F = game.facility_count();
  const auto taxes = random_eps_slope_taxes(F, eps, beta_for(game, eps), rng);
  double worst_mid = -kInf;
  double worst_first = -kInf;
  for (int k = 0; k < pairs; ++k) {
    const LoadVector a = random_load(F, rng);
    const LoadVector b = random_load(F, rng);
    LoadVector m(a.size());
    double dist2 = 0.0;
    double inner = 0.0;
    const CostVector grad = taxed_costs(game, taxes, a);
    for (std::size_t f = 0; f < a.size(); ++f) {
      m[f] = 0.5 * (a[f] + b[f]);
      dist2 += (a[f] - b[f]) * (a[f] - b[f]);
      inner += grad[f] * (b[f] - a[f]);
    }
    const double pa = potential(game, taxes, a);
    const double pb = potential(game, taxes, b);
    const double pm = potential(game, taxes, m);
    // Phi(m) <= (Phi(a) + Phi(b)) / 2 - eps |a-b|^2 / 8
    worst_mid = std::max(worst_mid, pm - 0.5 * (pa + pb) + eps * dist2 / 8.0);
    // Phi(b) >= Phi(a) + <grad, b - a> + eps |a-b|^2 / 2
    worst_first = std::max(worst_first, pa + inner + 0.5 * eps * dist2 - pb);
  }
  r.passed = worst_mid <= 1e-10 && worst_first <= 1e-10;
  r.detail = format("%g pairs; worst midpoint excess %.3g, worst first-order excess %.3g", pairs,
                    worst_mid, worst_first);
  return r;
}

PropertyResult check_potential_gradient(const Game& game, double eps, int points,
                                        std::mt19937_64& rng) {
  PropertyResult r{"potential_gradient", true, ""};
  const int F = game.facility_count();
  const double h = 1e-5;
  const auto taxes = random_eps_slope_taxes(F, eps, beta_for(game, eps), rng);
  auto near_kink = [&](int f, double u) {
    for (const auto& b : taxes[static_cast<std::size_t>(f)].breakpoints()) {
      if (std::abs(b.x - u) < 2.0 * h) return true;
    }
    return false;
  };
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    LoadVector y(static_cast<std::size_t>(F));
    for (int f = 0; f < F; ++f) {
      double u;
      do {
        u = uniform(rng, 2.0 * h, 1.0 - 2.0 * h);
      } while (near_kink(f, u));
      y[static_cast<std::size_t>(f)] = u;
    }
    const CostVector grad = taxed_costs(game, taxes, y);
    for (std::size_t f = 0; f < y.size(); ++f) {
      LoadVector up = y, down = y;
      up[f] += h;
      down[f] -= h;
      const double fd = (potential(game, taxes, up) - potential(game, taxes, down)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - grad[f]));
    }
  }
  r.passed = worst <= 1e-6;
  r.detail = format("%g points; worst |fd - (c + tau)| %.3g", points, worst);
  return r;
}

PropertyResult check_decomposition_roundtrip(const Game& game, int samples, std::mt19937_64& rng) {
  PropertyResult r{"decomposition_roundtrip", true, ""};
  double worst = 0.0;
  std::size_t most_paths = 0;
  try {
    for (int k = 0; k < samples; ++k) {
      const Strategy x = random_strategy(game, rng);
      const LoadVector y = facility_load(game, x);
      const std::vector<LoadVector> per = commodity_loads(game, x);
      const Strategy back = decompose(game, y, per);
      const LoadVector y2 = facility_load(game, back);
      for (std::size_t f = 0; f < y.size(); ++f) worst = std::max(worst, std::abs(y[f] - y2[f]));
      if (game.is_network()) {
        for (int i = 0; i < game.commodity_count(); ++i) {
          const LoadVector yi = commodity_loads(game, back)[static_cast<std::size_t>(i)];
          const LoadVector& ti = per[static_cast<std::size_t>(i)];
          for (std::size_t f = 0; f < yi.size(); ++f) worst = std::max(worst, std::abs(yi[f] - ti[f]));
          most_paths = std::max(most_paths, back[static_cast<std::size_t>(i)].size());
        }
      }
    }
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("decomposition failed: ") + e.what();
    return r;
  }
  const bool path_bound =
      !game.is_network() || most_paths <= static_cast<std::size_t>(game.facility_count());
  r.passed = worst <= 1e-8 && path_bound;
  r.detail = format("%g samples; worst load error %.3g; most paths per commodity %g", samples, worst,
                    static_cast<double>(most_paths));
  return r;
}

PropertyResult check_solver_vs_oracle(const Game& game, double eps, int samples,
                                      std::mt19937_64& rng, double tol) {
  PropertyResult r{"solver_vs_enumeration", true, ""};
  double worst = 0.0;
  try {
    for (int k = 0; k < samples; ++k) {
      const auto taxes = random_eps_slope_taxes(game.facility_count(), eps, beta_for(game, eps), rng);
      SolverConfig cfg;
      cfg.tol_eq = 1e-10;
      const EquilibriumFeedback fb = solve_equilibrium(game, taxes, cfg);
      const OracleReport ref = equilibrium_by_enumeration(game, taxes);
      for (std::size_t f = 0; f < fb.load.size(); ++f) {
        worst = std::max(worst, std::abs(fb.load[f] - ref.load[f]));
      }
    }
  } catch (const SizeError& e) {
    r.detail = std::string("skipped: ") + e.what();
    return r;
  }
  r.passed = worst <= tol;
  r.detail = format("%g taxes; worst per-coordinate difference %.3g (tol %.0e)", samples, worst, tol);
  return r;
}

NetworkEquivalenceStats network_sweep_equivalence(int networks, int max_vertices, std::uint64_t seed,
                                                  double tol) {
  std::mt19937_64 rng(seed);
  NetworkEquivalenceStats stats;
  for (int n = 0; n < networks; ++n) {
    net::Network network = random_network(max_vertices, rng);
    const int V = network.vertex_count();
    const int E = network.edge_count();
    std::vector<CostFunction> costs;
    CostVector cost(static_cast<std::size_t>(E));
    TaxVector tau(static_cast<std::size_t>(E));
    for (int e = 0; e < E; ++e) {
      cost[static_cast<std::size_t>(e)] = uniform(rng, 0.0, 1.0);
      tau[static_cast<std::size_t>(e)] = uniform(rng, 0.0, 0.5);
      costs.push_back(CostFunction::constant(cost[static_cast<std::size_t>(e)]));
    }
    const Game game(network, costs, {Commodity{1.0, {}, 0, V - 1}});
    ++stats.networks;

    std::vector<double> w(static_cast<std::size_t>(E));
    for (std::size_t e = 0; e < w.size(); ++e) w[e] = cost[e] + tau[e];
    const net::Path support = net::shortest_path(network, w, 0, V - 1).path;
    const Strategy x{{ActionFlow{support, 1.0, -1}}};
    const double support_cost = action_cost(support, w);

    for (int f = 0; f < E; ++f) {
      const auto walk_boundary = [&](double length) {
        return support_cost - (length - tau[static_cast<std::size_t>(f)]);
      };
      for (SweepDirection dir : {SweepDirection::kRaise, SweepDirection::kLower}) {
        const GapProfile profile = gap_under_test_tax(game, x, cost, tau, 0, f);
        const double expected = dir == SweepDirection::kRaise ? profile.upper(tol) : profile.lower(tol);
        const double actual = network_gap_sweep(game, x, cost, tau, 0, f, dir, tol);
        if (dir == SweepDirection::kLower && !contains_facility(support, f)) {
          const auto walk = net::shortest_walk_through_edge(network, w, 0, V - 1, f);
          if (walk && !walk->simple) {
            ++stats.non_simple_walks;
            if (!same_value(expected, walk_boundary(walk->length), tol)) {
              ++stats.walk_disagreements;
            }
          }
        }
        ++stats.comparisons;
        if (!same_value(expected, actual, tol)) {
          ++stats.mismatches;
        }
        if (std::isfinite(expected) && std::isfinite(actual)) {
          stats.max_error = std::max(stats.max_error, std::abs(expected - actual));
        }
      }
    }

    // Random multi-path flow and its decomposition.
    const auto paths = net::enumerate_simple_paths(network, 0, V - 1);
    std::vector<net::PathWeight> flow;
    const int count = uniform_int(rng, 1, std::min<int>(4, static_cast<int>(paths.size())));
    double total = 0.0;
    for (int k = 0; k < count; ++k) {
      const auto& p = paths[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(paths.size()) - 1))];
      flow.push_back({p, uniform(rng, 0.05, 1.0)});
      total += flow.back().weight;
    }
    for (auto& pw : flow) pw.weight /= total;
    // Equilibria under eps-slope taxes never route flow around a cycle.
    std::vector<double> load = net::path_loads(network, flow);
    cancel_cycles(network, load);
    ++stats.decompositions;
    try {
      const auto back = net::flow_decompose(network, load, 0, V - 1, 1.0);
      const std::vector<double> rebuilt = net::path_loads(network, back);
      double err = 0.0;
      for (std::size_t e = 0; e < load.size(); ++e) err = std::max(err, std::abs(load[e] - rebuilt[e]));
      bool simple = true;
      for (const auto& pw : back) simple = simple && net::is_simple_path(network, pw.path, 0, V - 1);
      if (err > tol || back.size() > static_cast<std::size_t>(E) || !simple) {
        ++stats.decomposition_failures;
      }
    } catch (const DecompositionError&) {
      ++stats.decomposition_failures;
    }
  }
  return stats;
}

PropertyResult check_network_sweep_equivalence(int networks, int max_vertices, std::uint64_t seed) {
  const NetworkEquivalenceStats s = network_sweep_equivalence(networks, max_vertices, seed);
  PropertyResult r{"network_sweep_equivalence", true, ""};
  r.passed = s.mismatches == 0 && s.decomposition_failures == 0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%d networks, %d comparisons, %d mismatches (max error %.3g), %d non-simple "
                "through-edge walks (%d would have disagreed), %d/%d decompositions failed",
                s.networks, s.comparisons, s.mismatches, s.max_error, s.non_simple_walks,
                s.walk_disagreements, s.decomposition_failures, s.decompositions);
  r.detail = buf;
  return r;
}

PropertyResult check_certified_soundness(const Game& game, const RoundRecord& round, int samples,
                                         std::mt19937_64& rng) {
  PropertyResult r{"certified_soundness", true, ""};
  if (round.strategy.empty() || round.tax_at_load.empty()) {
    r.passed = false;
    r.detail = "round has no recorded strategy";
    return r;
  }
  double worst = kInf;
  for (int k = 0; k < samples; ++k) {
    TaxVector tau = round.tax_at_load;
    for (int f : round.unknown) {
      const TaxRange& range = round.ranges[static_cast<std::size_t>(f)];
      tau[static_cast<std::size_t>(f)] = uniform(rng, range.lower, std::max(range.lower, range.upper));
    }
    CostVector w(round.cost.size());
    for (std::size_t f = 0; f < w.size(); ++f) w[f] = round.cost[f] + tau[f];
    for (int j = 0; j < game.commodity_count(); ++j) {
      worst = std::min(worst, gap(game, j, round.strategy, w));
    }
  }
  r.passed = worst >= -1e-8;
  r.detail = format("%g taxes; smallest commodity gap %.3g", samples, worst);
  return r;
}

std::vector<PropertyResult> audit_run(const Game& game, const RunResult& result,
                                      const AuditOptions& options) {
  std::vector<PropertyResult> out;
  const int F = game.facility_count();
  const double eps = options.eps;
  const double spacing = result.state.spacing();
  const int K = result.state.resolution();
  const double band = spacing + 4.0 * std::sqrt(2.0 * options.tol_eq / eps);

  int exploratory = 0;
  int max_queries = 0;
  int locality_violations = 0;
  double worst_disp = 0.0;
  double min_disp = kInf;
  int growth_violations = 0;
  for (const RoundRecord& rec : result.trace) {
    max_queries = std::max(max_queries, rec.queries);
    if (!rec.probe) continue;
    ++exploratory;
    const double d = rec.probe->displacement;
    worst_disp = std::max(worst_disp, d);
    min_disp = std::min(min_disp, d);
    if (!(d > 0.0) || d > band) ++locality_violations;
    if (rec.diagnostic.empty()) {
      const std::size_t grown = rec.known_total_after - rec.known_total_before;
      if (grown < 1 || grown > 2) ++growth_violations;
    }
  }
  if (result.termination == Termination::kAbortedDegenerate ||
      result.termination == Termination::kAbortedLocality) {
    ++locality_violations;
  }

  out.push_back({"exploratory_round_bound", exploratory <= (K + 1) * F,
                 format("%g exploratory rounds, bound (K+1)F = %g", exploratory,
                        static_cast<double>((K + 1) * F))});
  out.push_back({"queries_per_round", max_queries <= 2,
                 format("at most %g queries in a round", max_queries)});
  out.push_back({"perturbation_locality", locality_violations == 0,
                 format("%g violations; displacement range [%.3g, %.3g]", locality_violations,
                        exploratory ? min_disp : 0.0, worst_disp) +
                     format(", band %.6g", band)});
  out.push_back({"known_set_growth", growth_violations == 0,
                 format("%g rounds grew the known sets by other than 1 or 2", growth_violations)});

  int slope_violations = 0;
  double worst_index = 0.0;
  double worst_facility = 0.0;
  bool have_snapshots = false;
  std::vector<std::function<double(double)>> tau_star;
  for (int f = 0; f < F; ++f) tau_star.push_back(marginal_cost_tax(game.cost(f)));
  for (const RoundRecord& rec : result.trace) {
    if (rec.base_snapshot.empty()) continue;
    have_snapshots = true;
    for (int f = 0; f < F; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      const PiecewiseLinear& base = rec.base_snapshot[fi];
      if (base.min_slope() < -1e-12) ++slope_violations;
      for (double u : rec.known_snapshot[fi]) {
        worst_index = std::max(worst_index, std::abs(base(u) + eps * u - tau_star[fi](u)));
      }
      if (std::find(rec.unknown.begin(), rec.unknown.end(), f) == rec.unknown.end()) {
        const double y = std::clamp(rec.load[fi], 0.0, 1.0);
        worst_facility = std::max(worst_facility, std::abs(base(y) + eps * y - tau_star[fi](y)));
      }
    }
  }
  for (int f = 0; f < F; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    const PiecewiseLinear& base = result.plan.base[fi];
    if (base.min_slope() < -1e-12) ++slope_violations;
    for (double u : result.state.known[fi].points()) {
      worst_index = std::max(worst_index, std::abs(base(u) + eps * u - tau_star[fi](u)));
    }
  }
  out.push_back({"tax_slope_floor", slope_violations == 0,
                 format("%g base taxes decreasing somewhere (applied slope below eps)",
                        slope_violations)});
  if (options.analytic_tax) {
    out.push_back({"known_index_accuracy", worst_index <= 2.0 * eps + 1e-3,
                   format("max |tau - tau*| on known indexes %.6g, bound %.6g", worst_index,
                          2.0 * eps + 1e-3)});
    out.push_back({"known_facility_accuracy",
                   !have_snapshots || worst_facility <= 3.0 * eps + 1e-3,
                   have_snapshots ? format("max |tau(y) - tau*(y)| on known facilities %.6g, bound %.6g",
                                           worst_facility, 3.0 * eps + 1e-3)
                                  : std::string("skipped: run recorded no snapshots")});
  }
  return out;
}

std::vector<PropertyResult> validate_game(const Game& game, const ValidateOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::vector<PropertyResult> out;
  const double eps = options.eps;
  const double beta = options.beta > 0.0 ? options.beta : beta_for(game, eps);

  out.push_back(check_potential_convexity(game, eps, options.convexity_pairs, rng));
  out.push_back(check_potential_gradient(game, eps, options.gradient_points, rng));
  out.push_back(check_decomposition_roundtrip(game, options.decomposition_samples, rng));
  out.push_back(check_solver_vs_oracle(game, eps, options.solver_samples, rng));

  if (options.run_designer) {
    RunOptions ro;
    ro.eps = eps;
    ro.beta = beta;
    ro.tol_eq = default_tol_eq(eps, beta);
    SolverConfig cfg;
    cfg.tol_eq = ro.tol_eq;
    try {
      const RunResult result = run(game, make_solver_oracle(game, cfg), ro);
      out.push_back({"designer_terminates", result.termination == Termination::kSubroutineFalse,
                     std::string("termination ") + to_string(result.termination) + " after " +
                         std::to_string(result.rounds) + " rounds"});
      AuditOptions ao;
      ao.eps = eps;
      ao.beta = beta;
      ao.tol_eq = ro.tol_eq;
      for (PropertyResult& p : audit_run(game, result, ao)) out.push_back(std::move(p));
      if (result.termination == Termination::kSubroutineFalse && !result.trace.empty()) {
        out.push_back(check_certified_soundness(game, result.trace.back(), options.soundness_samples, rng));
      }
    } catch (const SolverError& e) {
      out.push_back({"designer_terminates", false, std::string("solver failure: ") + e.what()});
    }
  }
  return out;
}

}  // namespace taxlearn::oracles
