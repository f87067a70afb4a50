#include "taxlearn/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "taxlearn/errors.hpp"

namespace taxlearn::oracles {
namespace {

using Objective = std::function<double(std::span<const double>)>;

struct SearchResult {
  double value = std::numeric_limits<double>::infinity();
  LoadVector load;
  double resolution = 0.0;
  int dimension = 0;
};

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void compositions(int total, int parts, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int k = 0; k <= total; ++k) {
    current.push_back(k);
    compositions(total - k, parts - 1, current, out);
    current.pop_back();
  }
}

class StrategySpace {
 public:
  explicit StrategySpace(const Game& game) : game_(game.to_explicit(kMaxOracleActions + 1)) {
    std::size_t total = 0;
    for (int i = 0; i < game_.commodity_count(); ++i) total += game_.commodity(i).actions.size();
    if (total > kMaxOracleActions) {
      throw SizeError("oracle: game has " + std::to_string(total) + " actions, limit is " +
                      std::to_string(kMaxOracleActions));
    }
  }

  int dimension() const {
    int d = 0;
    for (int i = 0; i < game_.commodity_count(); ++i) {
      d += static_cast<int>(game_.commodity(i).actions.size()) - 1;
    }
    return d;
  }

  int resolution() const {
    for (int r = 1000; r > 1; --r) {
      double points = 1.0;
      for (int i = 0; i < game_.commodity_count(); ++i) {
        const int n = static_cast<int>(game_.commodity(i).actions.size());
        points *= binomial(r + n - 1, n - 1);
      }
      if (points <= kMaxGridPoints) return r;
    }
    return 1;
  }

  LoadVector load(const std::vector<std::vector<double>>& x) const {
    LoadVector y(static_cast<std::size_t>(game_.facility_count()), 0.0);
    for (int i = 0; i < game_.commodity_count(); ++i) {
      const auto& actions = game_.commodity(i).actions;
      for (std::size_t a = 0; a < actions.size(); ++a) {
        for (int f : actions[a]) y[static_cast<std::size_t>(f)] += x[static_cast<std::size_t>(i)][a];
      }
    }
    for (double& v : y) v = std::clamp(v, 0.0, 1.0);
    return y;
  }

  SearchResult minimize(const Objective& objective) const {
    const int m = game_.commodity_count();
    const int r = resolution();
    const auto F = static_cast<std::size_t>(game_.facility_count());

    // Per commodity: every grid composition and the load it contributes.
    std::vector<std::vector<std::vector<int>>> grid(static_cast<std::size_t>(m));
    std::vector<std::vector<LoadVector>> contribution(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const auto& c = game_.commodity(i);
      std::vector<int> scratch;
      compositions(r, static_cast<int>(c.actions.size()), scratch, grid[static_cast<std::size_t>(i)]);
      for (const auto& comp : grid[static_cast<std::size_t>(i)]) {
        LoadVector y(F, 0.0);
        for (std::size_t a = 0; a < comp.size(); ++a) {
          for (int f : c.actions[a]) y[static_cast<std::size_t>(f)] += c.weight * comp[a] / r;
        }
        contribution[static_cast<std::size_t>(i)].push_back(std::move(y));
      }
    }

    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_choice(static_cast<std::size_t>(m), 0);
    std::vector<std::size_t> choice(static_cast<std::size_t>(m), 0);
    LoadVector y(F, 0.0);
    std::function<void(int)> walk = [&](int i) {
      if (i == m) {
        LoadVector clamped = y;
        for (double& v : clamped) v = std::clamp(v, 0.0, 1.0);
        const double v = objective(clamped);
        if (v < best) {
          best = v;
          best_choice = choice;
        }
        return;
      }
      const auto& options = contribution[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < options.size(); ++k) {
        choice[static_cast<std::size_t>(i)] = k;
        for (std::size_t f = 0; f < F; ++f) y[f] += options[k][f];
        walk(i + 1);
        for (std::size_t f = 0; f < F; ++f) y[f] -= options[k][f];
      }
    };
    walk(0);

    std::vector<std::vector<double>> x(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const auto& comp = grid[static_cast<std::size_t>(i)][best_choice[static_cast<std::size_t>(i)]];
      for (int k : comp) x[static_cast<std::size_t>(i)].push_back(game_.commodity(i).weight * k / r);
    }
    best = objective(load(x));

    // Compass search along pairwise mass transfers inside each commodity.
    double h = 1.0 / r;
    for (int guard = 0; h > 1e-10 && guard < 1000000; ++guard) {
      bool improved = false;
      for (int i = 0; i < m; ++i) {
        auto& xi = x[static_cast<std::size_t>(i)];
        const double step = h * game_.commodity(i).weight;
        for (std::size_t a = 0; a < xi.size(); ++a) {
          for (std::size_t b = 0; b < xi.size(); ++b) {
            if (a == b) continue;
            const double amount = std::min(step, xi[a]);
            if (!(amount > 0.0)) continue;
            xi[a] -= amount;
            xi[b] += amount;
            const double v = objective(load(x));
            if (v < best) {
              best = v;
              improved = true;
            } else {
              xi[a] += amount;
              xi[b] -= amount;
            }
          }
        }
      }
      if (!improved) h *= 0.5;
    }

    SearchResult result;
    result.value = best;
    result.load = load(x);
    result.resolution = 1.0 / r;
    result.dimension = dimension();
    return result;
  }

 private:
  Game game_;
};

double simpson(const std::function<double(double)>& g, double a, double b) {
  return (b - a) / 6.0 * (g(a) + 4.0 * g(0.5 * (a + b)) + g(b));
}

}  // namespace

nlohmann::json OracleReport::to_json() const {
  return {{"quantity", quantity},
          {"value", value},
          {"method", method},
          {"resolution", resolution},
          {"load", load}};
}

PigouSolution pigou_analytic(double c, double p) {
  if (!(c > 0.0 && c <= 1.0)) throw ArgumentError("pigou_analytic: c must lie in (0,1]");
  if (!(p >= 1.0)) throw ArgumentError("pigou_analytic: p must be at least 1");
  PigouSolution s;
  s.equilibrium_load = std::pow(c, 1.0 / p);
  s.optimal_load = std::pow(c / (p + 1.0), 1.0 / p);
  s.equilibrium_cost = c;
  s.optimal_cost = c - c * s.optimal_load + std::pow(s.optimal_load, p + 1.0);
  return s;
}

OracleReport optimal_social_cost(const Game& game) {
  const StrategySpace space(game);
  const SearchResult r = space.minimize([&](std::span<const double> y) {
    double total = 0.0;
    for (std::size_t f = 0; f < y.size(); ++f) total += y[f] * game.cost(static_cast<int>(f)).value(y[f]);
    return total;
  });
  OracleReport report;
  report.quantity = "optimal_social_cost";
  report.value = r.value;
  report.method = r.dimension <= 1 ? "grid_search_1d" : "grid_search_nd";
  report.resolution = r.resolution;
  report.load = r.load;
  return report;
}

OracleReport equilibrium_by_enumeration(const Game& game, std::span<const PiecewiseLinear> taxes) {
  const StrategySpace space(game);
  const QuadraturePotential phi(game, taxes);
  const SearchResult r = space.minimize([&](std::span<const double> y) { return phi(y); });
  OracleReport report;
  report.quantity = "equilibrium_potential";
  report.value = r.value;
  report.method = r.dimension <= 1 ? "grid_search_1d" : "grid_search_nd";
  report.resolution = r.resolution;
  report.load = r.load;
  return report;
}

QuadraturePotential::QuadraturePotential(const Game& game, std::span<const PiecewiseLinear> taxes,
                                         int panels)
    : game_(&game), taxes_(taxes.begin(), taxes.end()) {
  if (panels < 1) throw ArgumentError("quadrature: need at least one panel");
  if (!taxes_.empty() && static_cast<int>(taxes_.size()) != game.facility_count()) {
    throw ArgumentError("quadrature: one tax per facility required");
  }
  for (int f = 0; f < game.facility_count(); ++f) {
    std::vector<double> nodes;
    for (int k = 0; k <= panels; ++k) nodes.push_back(static_cast<double>(k) / panels);
    if (!taxes_.empty()) {
      for (const auto& b : taxes_[static_cast<std::size_t>(f)].breakpoints()) nodes.push_back(b.x);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-15; }),
                nodes.end());
    std::vector<double> cumulative(nodes.size(), 0.0);
    auto g = [&](double u) { return integrand(f, u); };
    for (std::size_t k = 1; k < nodes.size(); ++k) {
      cumulative[k] = cumulative[k - 1] + simpson(g, nodes[k - 1], nodes[k]);
    }
    nodes_.push_back(std::move(nodes));
    cumulative_.push_back(std::move(cumulative));
  }
}

double QuadraturePotential::integrand(int f, double u) const {
  u = std::clamp(u, 0.0, 1.0);
  double v = game_->cost(f).value(u);
  if (!taxes_.empty()) v += taxes_[static_cast<std::size_t>(f)](u);
  return v;
}

double QuadraturePotential::facility(int f, double y) const {
  const auto& nodes = nodes_[static_cast<std::size_t>(f)];
  const auto& cumulative = cumulative_[static_cast<std::size_t>(f)];
  y = std::clamp(y, 0.0, 1.0);
  auto it = std::upper_bound(nodes.begin(), nodes.end(), y);
  const std::size_t k = it == nodes.begin() ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
  return cumulative[k] + simpson([&](double u) { return integrand(f, u); }, nodes[k], y);
}

double QuadraturePotential::operator()(std::span<const double> y) const {
  double total = 0.0;
  for (std::size_t f = 0; f < y.size(); ++f) total += facility(static_cast<int>(f), y[f]);
  return total;
}

double price_of_anarchy(const Game& game, const SolverConfig& cfg) {
  const EquilibriumFeedback fb = solve_equilibrium(game, {}, cfg);
  const double optimum = optimal_social_cost(game).value;
  if (!(optimum > 0.0)) throw DomainError("price_of_anarchy: optimal social cost is 0");
  return social_cost(game, fb.load) / optimum;
}

}  // namespace taxlearn::oracles
