#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "taxlearn/equilibrium.hpp"
#include "taxlearn/game.hpp"
#include "taxlearn/validation.hpp"

using namespace taxlearn;
using Catch::Approx;

namespace {

// Fine PWL interpolant of u -> scale * u^p.
PiecewiseLinear tabulate(double scale, double p, int pieces = 4000) {
  std::vector<PiecewiseLinear::Breakpoint> pts;
  for (int k = 0; k <= pieces; ++k) {
    const double u = static_cast<double>(k) / pieces;
    pts.push_back({u, scale * std::pow(u, p)});
  }
  return PiecewiseLinear(std::move(pts));
}

SolverConfig tight() {
  SolverConfig cfg;
  cfg.tol_eq = 1e-12;
  return cfg;
}

}  // namespace

TEST_CASE("single action carries the whole weight", "[equilibrium]") {
  const Game g({CostFunction::affine(0.2, 0.8), CostFunction::monomial(1.0, 2.0)},
               {Commodity{1.0, {{0, 1}}}});
  const std::vector<PiecewiseLinear> tax{PiecewiseLinear::line(0, 0.7), PiecewiseLinear::line(0, 0.1)};
  const auto fb = solve_equilibrium(g, tax);
  CHECK(fb.load[0] == 1.0);
  CHECK(fb.load[1] == 1.0);
  CHECK(fb.cost[0] == Approx(1.0));
}

TEST_CASE("Pigou equilibrium loads", "[equilibrium]") {
  const Game g = make_pigou(0.2, 2.0);
  const auto untaxed = solve_equilibrium(g, {}, tight());
  CHECK(untaxed.load[1] == Approx(std::sqrt(0.2)).margin(1e-6));
  CHECK(untaxed.load[1] == Approx(0.44721).margin(1e-5));
  CHECK(untaxed.certified_eps <= 1e-12);

  const std::vector<PiecewiseLinear> tax{PiecewiseLinear::zero(), tabulate(2.0, 2.0)};
  const auto taxed = solve_equilibrium(g, tax, tight());
  CHECK(taxed.load[1] == Approx(std::sqrt(0.2 / 3.0)).margin(1e-6));
  CHECK(taxed.load[1] == Approx(0.25820).margin(1e-5));
  // Feedback costs exclude the tax.
  CHECK(taxed.cost[1] == Approx(taxed.load[1] * taxed.load[1]).margin(1e-12));
}

TEST_CASE("explicit and network forms agree", "[equilibrium]") {
  const Game net = make_pigou(0.6, 4.0);
  const auto a = solve_equilibrium(net, {}, tight());
  const auto b = solve_equilibrium(net.to_explicit(), {}, tight());
  CHECK(a.load[0] == Approx(b.load[0]).margin(1e-8));
  CHECK(a.load[1] == Approx(std::pow(0.6, 0.25)).margin(1e-6));
}

TEST_CASE("returned feedback is a certified equilibrium", "[equilibrium][property]") {
  std::mt19937_64 rng(23);
  const Game g({CostFunction::affine(0.1, 0.8), CostFunction::monomial(1.0, 2.0),
                CostFunction::polynomial({0.3, 0.0, 0.5})},
               {Commodity{0.6, {{0}, {1, 2}}}, Commodity{0.4, {{1}, {2}, {0, 2}}}});
  for (int k = 0; k < 20; ++k) {
    const auto taxes = oracles::random_eps_slope_taxes(g.facility_count(), 0.05, 1.0, rng);
    SolverConfig cfg;
    cfg.tol_eq = 1e-9;
    const auto fb = solve_equilibrium(g, taxes, cfg);
    const CostVector taxed = taxed_costs(g, taxes, fb.load);
    CHECK(is_epsilon_equilibrium(g, fb.strategy, taxed, 1e-9));
    CHECK(fb.certified_eps <= 1e-9);
  }
}

TEST_CASE("eps-slope taxes give a unique load from any start", "[equilibrium][property]") {
  std::mt19937_64 rng(29);
  const Game g({CostFunction::constant(0.45), CostFunction::affine(0.25, 0.5),
                CostFunction::monomial(0.8, 3.0)},
               {Commodity{0.5, {{0}, {1}, {2}}}, Commodity{0.5, {{0, 1}, {2}}}});
  const double eps = 0.05, tol = 1e-9;
  const double band = 2.0 * std::sqrt(2.0 * tol / eps);
  for (int k = 0; k < 10; ++k) {
    const auto taxes = oracles::random_eps_slope_taxes(g.facility_count(), eps, 1.0, rng);
    SolverConfig cfg;
    cfg.tol_eq = tol;
    const auto a = solve_equilibrium(g, taxes, cfg);
    const Strategy start = oracles::random_strategy(g, rng);
    const auto b = solve_equilibrium(g, taxes, cfg, &start);
    for (std::size_t f = 0; f < a.load.size(); ++f) CHECK(std::abs(a.load[f] - b.load[f]) <= band);
  }
}

TEST_CASE("changing one facility's tax moves that facility", "[equilibrium][property]") {
  std::mt19937_64 rng(31);
  const Game g({CostFunction::affine(0.1, 0.8), CostFunction::monomial(1.0, 2.0),
                CostFunction::polynomial({0.3, 0.0, 0.5})},
               {Commodity{0.6, {{0}, {1, 2}}}, Commodity{0.4, {{1}, {2}, {0, 2}}}});
  const double eps = 0.05, tol = 1e-10;
  const double band = 2.0 * std::sqrt(2.0 * tol / eps);
  SolverConfig cfg;
  cfg.tol_eq = tol;
  int moved = 0;
  for (int k = 0; k < 20; ++k) {
    auto taxes = oracles::random_eps_slope_taxes(g.facility_count(), eps, 1.0, rng);
    const auto a = solve_equilibrium(g, taxes, cfg);
    const int f = static_cast<int>(rng() % 3);
    taxes[static_cast<std::size_t>(f)] = taxes[static_cast<std::size_t>(f)].plus_linear(0.05);
    const auto b = solve_equilibrium(g, taxes, cfg);
    double worst = 0.0;
    for (std::size_t e = 0; e < a.load.size(); ++e) worst = std::max(worst, std::abs(a.load[e] - b.load[e]));
    if (worst > band) {
      ++moved;
      CHECK(std::abs(a.load[static_cast<std::size_t>(f)] - b.load[static_cast<std::size_t>(f)]) > band);
    }
  }
  CHECK(moved > 0);
}

TEST_CASE("load jumps under a tiny tax change without the eps slope", "[equilibrium][regression]") {
  const Game g({CostFunction::constant(1.0), CostFunction::constant(1.0 - 1e-3)},
               {Commodity{1.0, {{0}, {1}}}});
  const std::vector<PiecewiseLinear> zero{PiecewiseLinear::zero(), PiecewiseLinear::zero()};
  const std::vector<PiecewiseLinear> bumped{PiecewiseLinear::zero(), PiecewiseLinear::line(2e-3, 2e-3)};
  const auto a = solve_equilibrium(g, zero);
  const auto b = solve_equilibrium(g, bumped);
  CHECK(a.load[1] == Approx(1.0));
  CHECK(b.load[0] == Approx(1.0));
}

TEST_CASE("solver trace CSV", "[equilibrium]") {
  SolverConfig cfg;
  cfg.record_trace = true;
  const auto fb = solve_equilibrium(make_pigou(0.2, 2.0), {}, cfg);
  REQUIRE_FALSE(fb.trace.empty());
  std::ostringstream out;
  write_solver_trace_csv(out, fb.trace);
  CHECK(out.str().rfind("iteration,potential,fw_gap,residual\n", 0) == 0);
  for (std::size_t k = 1; k < fb.trace.size(); ++k) {
    CHECK(fb.trace[k].potential <= fb.trace[k - 1].potential + 1e-12);
  }
}

TEST_CASE("best response matches enumeration in networks", "[equilibrium]") {
  const Game g = make_pigou(0.3, 2.0);
  const std::vector<double> c{0.3, 0.2};
  const BestResponse br = best_response(g, 0, c);
  CHECK(br.action == Action{1});
  CHECK(br.cost == Approx(0.2));
}
