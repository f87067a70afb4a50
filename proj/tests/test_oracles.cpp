#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "taxlearn/equilibrium.hpp"
#include "taxlearn/errors.hpp"
#include "taxlearn/io.hpp"
#include "taxlearn/oracles.hpp"
#include "taxlearn/validation.hpp"

using namespace taxlearn;
using namespace taxlearn::oracles;
using Catch::Approx;

namespace {

Game fixture(const std::string& name) {
  return load_game_file(std::string(TAXLEARN_FIXTURES) + "/" + name);
}

}  // namespace

TEST_CASE("analytic Pigou solutions", "[oracles]") {
  const PigouSolution a = pigou_analytic(0.2, 2.0);
  CHECK(a.equilibrium_load == Approx(0.447214).margin(1e-6));
  CHECK(a.optimal_load == Approx(0.258199).margin(1e-6));
  CHECK(a.equilibrium_cost == Approx(0.2));
  CHECK(a.optimal_cost == Approx(0.165573).margin(1e-6));

  const PigouSolution b = pigou_analytic(1.0, 2.0);
  CHECK(b.equilibrium_load == Approx(1.0));
  CHECK(b.optimal_load == Approx(0.57735).margin(1e-5));
  CHECK(b.optimal_cost == Approx(0.615100).margin(1e-6));

  const PigouSolution c = pigou_analytic(1.0, 1.0);
  CHECK(c.optimal_load == Approx(0.5));
  CHECK(c.optimal_cost == Approx(0.75));

  CHECK(pigou_analytic(0.6, 2.0).optimal_cost == Approx(0.421115).margin(1e-6));
  CHECK_THROWS_AS(pigou_analytic(0.0, 2.0), ArgumentError);
  CHECK_THROWS_AS(pigou_analytic(0.5, 0.5), ArgumentError);
}

TEST_CASE("grid search agrees with the analytic optimum", "[oracles]") {
  for (double c : {0.2, 0.6, 1.0}) {
    for (double p : {2.0, 4.0}) {
      INFO("c=" << c << " p=" << p);
      const OracleReport r = optimal_social_cost(make_pigou(c, p));
      CHECK(r.method == "grid_search_1d");
      CHECK(r.value == Approx(pigou_analytic(c, p).optimal_cost).margin(1e-5));
    }
  }
  const OracleReport r = optimal_social_cost(make_pigou(0.6, 4.0));
  CHECK(r.value == Approx(0.317488).margin(1e-5));
  CHECK(r.load[1] == Approx(0.588566).margin(1e-4));
}

TEST_CASE("constant costs: optimum equals equilibrium", "[oracles]") {
  const Game g({CostFunction::constant(0.3), CostFunction::constant(0.5)},
               {Commodity{1.0, {{0}, {1}}}});
  CHECK(optimal_social_cost(g).value == Approx(0.3).margin(1e-9));
  CHECK(price_of_anarchy(g) == Approx(1.0).margin(1e-6));
}

TEST_CASE("price of anarchy", "[oracles]") {
  CHECK(price_of_anarchy(make_pigou(0.2, 2.0)) == Approx(0.2 / 0.165573).margin(1e-4));
  CHECK(price_of_anarchy(make_pigou(0.2, 2.0)) == Approx(1.2079).margin(1e-4));
  // Grows with the exponent when c = 1.
  CHECK(price_of_anarchy(make_pigou(1.0, 8.0)) > price_of_anarchy(make_pigou(1.0, 2.0)));
  const Game free({CostFunction::monomial(1.0, 2.0)}, {Commodity{1.0, {{0}}}});
  CHECK(price_of_anarchy(free) == Approx(1.0));
  const Game zero({CostFunction::constant(0.0)}, {Commodity{1.0, {{0}}}});
  CHECK_THROWS_AS(price_of_anarchy(zero), DomainError);
}

TEST_CASE("equilibrium by enumeration", "[oracles]") {
  const OracleReport r = equilibrium_by_enumeration(make_pigou(0.2, 2.0), {});
  CHECK(r.load[1] == Approx(0.447214).margin(1e-4));
  CHECK(r.quantity == "equilibrium_potential");

  const Game single = fixture("single_action.json");
  const OracleReport s = equilibrium_by_enumeration(single, {});
  CHECK(s.load[0] == 1.0);
  CHECK(s.load[1] == 1.0);

  const OracleReport t = equilibrium_by_enumeration(fixture("tiny.json"), {});
  CHECK(t.method == "grid_search_nd");
}

TEST_CASE("oracles reject games that are too large", "[oracles]") {
  const Game big = fixture("grid_network.json");
  CHECK_THROWS_AS(optimal_social_cost(big), SizeError);
  CHECK_THROWS_AS(equilibrium_by_enumeration(big, {}), SizeError);
}

TEST_CASE("quadrature potential matches the closed form", "[oracles]") {
  std::mt19937_64 rng(53);
  const Game g = fixture("tiny.json");
  for (int k = 0; k < 20; ++k) {
    const auto taxes = random_eps_slope_taxes(g.facility_count(), 0.05, 1.0, rng);
    const QuadraturePotential q(g, taxes);
    const LoadVector y = facility_load(g, random_strategy(g, rng));
    CHECK(q(y) == Approx(potential(g, taxes, y)).margin(1e-12));
  }
}

TEST_CASE("an equilibrium minimises the potential up to its eps", "[oracles][property]") {
  const Game g = fixture("tiny_shared.json");
  SolverConfig cfg;
  cfg.tol_eq = 1e-6;
  const auto fb = solve_equilibrium(g, {}, cfg);
  const OracleReport best = equilibrium_by_enumeration(g, {});
  const double phi = potential(g, {}, fb.load);
  const double phi_min = potential(g, {}, best.load);
  CHECK(phi <= phi_min + fb.certified_eps + 1e-9);
}

TEST_CASE("solver agrees with enumeration on the tiny fixtures", "[oracles]") {
  std::mt19937_64 rng(59);
  for (const char* name : {"tiny.json", "tiny_shared.json", "pigou.json", "diamond.json", "braess.json"}) {
    INFO(name);
    const PropertyResult r = check_solver_vs_oracle(fixture(name), 0.05, 3, rng);
    INFO(r.detail);
    CHECK(r.passed);
  }
}

TEST_CASE("validate suite passes on the fixtures", "[oracles]") {
  ValidateOptions opt;
  opt.convexity_pairs = 200;
  opt.gradient_points = 50;
  opt.solver_samples = 1;
  opt.soundness_samples = 50;
  for (const char* name : {"tiny.json", "diamond.json", "single_action.json"}) {
    for (const PropertyResult& p : validate_game(fixture(name), opt)) {
      INFO(name << " " << p.name << ": " << p.detail);
      CHECK(p.passed);
    }
  }
}

TEST_CASE("report JSON", "[oracles]") {
  const OracleReport r = optimal_social_cost(make_pigou(0.2, 2.0));
  const auto j = r.to_json();
  CHECK(j.at("quantity") == "optimal_social_cost");
  CHECK(j.at("method") == "grid_search_1d");
  CHECK(j.at("value").get<double>() == Approx(0.165573).margin(1e-6));
}
