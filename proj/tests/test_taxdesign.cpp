#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "taxlearn/errors.hpp"
#include "taxlearn/io.hpp"
#include "taxlearn/oracles.hpp"
#include "taxlearn/taxdesign.hpp"
#include "taxlearn/validation.hpp"

using namespace taxlearn;
using Catch::Approx;

namespace {

RunResult learn(const Game& g, double eps, double beta, bool reuse = false) {
  RunOptions opt;
  opt.eps = eps;
  opt.beta = beta;
  opt.tol_eq = default_tol_eq(eps, beta);
  opt.reuse_solver_strategy = reuse;
  SolverConfig cfg;
  cfg.tol_eq = opt.tol_eq;
  return run(g, make_solver_oracle(g, cfg), opt);
}

}  // namespace

TEST_CASE("designer initialisation", "[taxdesign]") {
  const DesignerState s = init_designer(2, 0.5, 1.0);
  CHECK(s.resolution() == 4);
  CHECK(s.spacing() == 0.25);
  CHECK(s.delta == 0.00390625);
  CHECK(s.plan.applied_value(0, 1.0) == Approx(1.5));
  CHECK(s.plan.applied_value(1, 0.0) == 0.0);
  for (const auto& k : s.known) {
    CHECK(k.size() == 1);
    CHECK(k.floor(0.7) == 0.0);
  }
  CHECK(init_designer(1, 0.05, 2.0).resolution() == 80);
  CHECK_THROWS_AS(init_designer(2, 0.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(init_designer(2, 0.1, -1.0), ArgumentError);
}

TEST_CASE("facility classification", "[taxdesign]") {
  DesignerState s = init_designer(3, 0.5, 1.0);
  s.known[2].insert_index(1);
  s.known[2].insert_index(2);
  const std::vector<double> y{0.0, 0.3, 0.3};
  const Classification c = classify_facilities(s, y);
  CHECK(c.known == std::vector<int>{0, 2});
  CHECK(c.unknown == std::vector<int>{1});

  // A grid-exact load only needs its own point.
  s.known[1].insert_index(2);
  const std::vector<double> exact{0.5, 0.5, 0.5};
  CHECK(classify_facilities(s, exact).known == std::vector<int>{1, 2});
}

TEST_CASE("feasible range", "[taxdesign]") {
  const DesignerState s = init_designer(1, 0.1, 1.0);
  const TaxRange r = feasible_range(s, 0, 0.3);
  CHECK(r.lower == Approx(0.03));
  CHECK(r.upper == Approx(1.03));

  DesignerState t = init_designer(1, 0.1, 1.0);
  t.plan.base[0] = t.plan.base[0].update(0.25, 0.4);
  t.known[0].insert_index(t.grid.snapped_index(0.25));
  const TaxRange rt = feasible_range(t, 0, 0.27);
  CHECK(rt.lower == Approx(0.4 + 0.1 * 0.25 + 0.1 * 0.02));
  CHECK(rt.lower <= rt.upper);
}

TEST_CASE("two-point update", "[taxdesign]") {
  DesignerState s = init_designer(1, 0.5, 1.0);
  const auto added = update_tax(s, 0, 0.5, 0.45, 0.25, 0.2025);
  REQUIRE(added == std::vector<double>{0.5});
  CHECK(s.plan.base[0](0.5) == Approx(0.475));
  CHECK(std::abs(s.plan.base[0](0.5) - 0.5) <= 0.025 + 1e-12);
  CHECK(s.known[0].contains(0.5));
  CHECK_THROWS_AS(update_tax(s, 0, 0.5, 0.45, 0.25, 0.2025), ContractError);
}

TEST_CASE("two-point update clips to the neighbouring values", "[taxdesign]") {
  DesignerState s = init_designer(1, 0.05, 0.1);
  const auto added = update_tax(s, 0, 0.5, 0.45, 0.5, 0.2);
  REQUIRE(added.size() == 1);
  CHECK(s.plan.base[0](0.5) == Approx(0.1));
}

TEST_CASE("an off-grid load updates both neighbours", "[taxdesign]") {
  DesignerState s = init_designer(1, 0.5, 1.0);
  const auto added = update_tax(s, 0, 0.3, 0.29, 0.09, 0.0841);
  CHECK(added == std::vector<double>{0.25, 0.5});
  CHECK(s.known[0].size() == 3);
  CHECK(s.plan.base[0](0.25) <= s.plan.base[0](0.5));
}

TEST_CASE("single-action game terminates at once", "[taxdesign]") {
  const Game g = load_game_file(std::string(TAXLEARN_FIXTURES) + "/single_action.json");
  const RunResult r = learn(g, 0.05, 2.0);
  CHECK(r.termination == Termination::kSubroutineFalse);
  CHECK(r.rounds == 1);
  CHECK(r.queries == 1);
  CHECK(r.plan.base[0] == PiecewiseLinear::line(0.0, 2.0));
}

TEST_CASE("Pigou run meets the optimality bound", "[taxdesign]") {
  const double eps = 0.05, beta = 2.0;
  const Game g = make_pigou(0.2, 2.0);
  const RunResult r = learn(g, eps, beta);
  REQUIRE(r.termination == Termination::kSubroutineFalse);
  const double tol = default_tol_eq(eps, beta);
  const double opt = oracles::pigou_analytic(0.2, 2.0).optimal_cost;
  CHECK(r.final_social_cost - opt <= 6 * eps * 2 + 10 * std::sqrt(2 * tol / eps));
  CHECK(r.rounds <= 160);

  oracles::AuditOptions audit;
  audit.eps = eps;
  audit.beta = beta;
  audit.tol_eq = tol;
  for (const auto& p : oracles::audit_run(g, r, audit)) {
    INFO(p.name << ": " << p.detail);
    CHECK(p.passed);
  }
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    const auto grow = r.trace[k - 1].known_total_after - r.trace[k - 1].known_total_before;
    CHECK((grow == 1 || grow == 2));
  }
}

TEST_CASE("constant costs are learned as a zero tax", "[taxdesign]") {
  const Game g({CostFunction::constant(0.3), CostFunction::constant(0.35)},
               {Commodity{1.0, {{0}, {1}}}});
  const double eps = 0.1;
  const RunResult r = learn(g, eps, 0.5);
  CHECK(r.termination == Termination::kSubroutineFalse);
  for (std::size_t f = 0; f < r.state.known.size(); ++f) {
    for (double u : r.state.known[f].points()) CHECK(std::abs(r.plan.base[f](u)) <= eps);
  }
}

TEST_CASE("reusing the solver strategy gives the same decisions", "[taxdesign]") {
  for (const char* name : {"pigou.json", "diamond.json", "tiny.json"}) {
    INFO(name);
    const Game g = load_game_file(std::string(TAXLEARN_FIXTURES) + "/" + name);
    const double beta = std::max(guarantee_beta(g), 0.05);
    const RunResult a = learn(g, 0.05, beta, false);
    const RunResult b = learn(g, 0.05, beta, true);
    REQUIRE(a.rounds == b.rounds);
    CHECK(a.termination == b.termination);
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
      REQUIRE(a.trace[k].probe.has_value() == b.trace[k].probe.has_value());
      if (!a.trace[k].probe) continue;
      CHECK(a.trace[k].probe->facility == b.trace[k].probe->facility);
      CHECK(a.trace[k].probe->sign == b.trace[k].probe->sign);
      CHECK(a.trace[k].probe->branch == b.trace[k].probe->branch);
    }
  }
}

TEST_CASE("round budget", "[taxdesign]") {
  CHECK(default_round_budget(2, 0.05, 2.0) == std::max(160 + 2, 80 * 2 + 1));
  const Game g = make_pigou(0.2, 2.0);
  RunOptions opt;
  opt.eps = 0.05;
  opt.beta = 2.0;
  opt.t_max = 2;
  opt.tol_eq = default_tol_eq(0.05, 2.0);
  SolverConfig cfg;
  cfg.tol_eq = opt.tol_eq;
  const RunResult r = run(g, make_solver_oracle(g, cfg), opt);
  CHECK(r.termination == Termination::kRoundBudgetExhausted);
  CHECK(r.rounds == 2);
}

TEST_CASE("guarantee beta covers smoothness and the slope at one", "[taxdesign]") {
  CHECK(guarantee_beta(make_pigou(0.5, 4.0)) == Approx(12.0));
  CHECK(guarantee_beta(make_pigou(0.5, 1.0)) == Approx(1.0));
  const Game lin({CostFunction::affine(0.0, 0.9)}, {Commodity{1.0, {{0}}}});
  CHECK(guarantee_beta(lin) == Approx(0.9));
}
