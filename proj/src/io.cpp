#include "taxlearn/io.hpp"

#include <fstream>

#include "taxlearn/errors.hpp"

namespace taxlearn {
namespace {

using nlohmann::json;

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(where + ": missing field '" + key + "'");
  }
  return j.at(key);
}

double number(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number()) throw ConfigError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

int integer(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number_integer()) throw ConfigError(where + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

}  // namespace

CostFunction cost_from_json(const json& j) {
  const std::string where = "cost";
  const json& kind_field = field(j, "kind", where);
  if (!kind_field.is_string()) throw ConfigError("cost: 'kind' must be a string");
  const std::string kind = kind_field.get<std::string>();
  if (kind == "constant") return CostFunction::constant(number(j, "value", where));
  if (kind == "affine") {
    return CostFunction::affine(number(j, "intercept", where), number(j, "slope", where));
  }
  if (kind == "polynomial") {
    const json& coeffs = field(j, "coefficients", where);
    if (!coeffs.is_array() || coeffs.empty()) {
      throw ConfigError("cost: 'coefficients' must be a non-empty array");
    }
    std::vector<double> a;
    for (const json& v : coeffs) {
      if (!v.is_number()) throw ConfigError("cost: coefficients must be numbers");
      a.push_back(v.get<double>());
    }
    return CostFunction::polynomial(std::move(a));
  }
  if (kind == "monomial") {
    return CostFunction::monomial(number(j, "scale", where), number(j, "exponent", where));
  }
  throw ConfigError("cost: unknown kind '" + kind + "'");
}

json cost_to_json(const CostFunction& cost) {
  switch (cost.kind()) {
    case CostFunction::Kind::kConstant:
      return {{"kind", "constant"}, {"value", cost.coefficients()[0]}};
    case CostFunction::Kind::kAffine:
      return {{"kind", "affine"}, {"intercept", cost.coefficients()[0]},
              {"slope", cost.coefficients()[1]}};
    case CostFunction::Kind::kPolynomial:
      return {{"kind", "polynomial"}, {"coefficients", cost.coefficients()}};
    case CostFunction::Kind::kMonomial:
      return {{"kind", "monomial"}, {"scale", cost.scale()}, {"exponent", cost.exponent()}};
  }
  return {};
}

Game game_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("game: document must be a JSON object");
  const json& commodities = field(j, "commodities", "game");
  if (!commodities.is_array()) throw ConfigError("game: 'commodities' must be an array");

  if (j.contains("vertices")) {
    const int vertices = integer(j, "vertices", "network");
    const json& edges = field(j, "edges", "network");
    if (!edges.is_array()) throw ConfigError("network: 'edges' must be an array");
    std::vector<net::Edge> list;
    std::vector<CostFunction> costs;
    for (const json& e : edges) {
      list.push_back({integer(e, "from", "edge"), integer(e, "to", "edge")});
      costs.push_back(cost_from_json(field(e, "cost", "edge")));
    }
    std::vector<Commodity> parsed;
    for (const json& c : commodities) {
      Commodity commodity;
      commodity.weight = number(c, "weight", "commodity");
      commodity.source = integer(c, "source", "commodity");
      commodity.target = integer(c, "target", "commodity");
      parsed.push_back(commodity);
    }
    net::Network network = [&] {
      try {
        return net::Network(vertices, std::move(list));
      } catch (const ArgumentError& err) {
        throw InstanceError(err.what());
      }
    }();
    return Game(std::move(network), std::move(costs), std::move(parsed));
  }

  const json& facilities = field(j, "facilities", "game");
  if (!facilities.is_array()) throw ConfigError("game: 'facilities' must be an array");
  std::vector<CostFunction> costs;
  for (const json& f : facilities) costs.push_back(cost_from_json(field(f, "cost", "facility")));
  std::vector<Commodity> parsed;
  for (const json& c : commodities) {
    Commodity commodity;
    commodity.weight = number(c, "weight", "commodity");
    const json& actions = field(c, "actions", "commodity");
    if (!actions.is_array()) throw ConfigError("commodity: 'actions' must be an array");
    for (const json& a : actions) {
      if (!a.is_array()) throw ConfigError("commodity: every action must be an array");
      Action action;
      for (const json& f : a) {
        if (!f.is_number_integer()) throw ConfigError("commodity: facility ids must be integers");
        action.push_back(f.get<int>());
      }
      commodity.actions.push_back(std::move(action));
    }
    parsed.push_back(std::move(commodity));
  }
  return Game(std::move(costs), std::move(parsed));
}

Game load_game_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open game file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& err) {
    throw ConfigError("game file '" + path + "': " + err.what());
  }
  return game_from_json(j);
}

json game_to_json(const Game& game) {
  json j;
  json commodities = json::array();
  if (game.is_network()) {
    const net::Network& network = game.network();
    j["vertices"] = network.vertex_count();
    json edges = json::array();
    for (int e = 0; e < network.edge_count(); ++e) {
      edges.push_back({{"from", network.edge(e).from},
                       {"to", network.edge(e).to},
                       {"cost", cost_to_json(game.cost(e))}});
    }
    j["edges"] = std::move(edges);
    for (int i = 0; i < game.commodity_count(); ++i) {
      const Commodity& c = game.commodity(i);
      commodities.push_back({{"source", c.source}, {"target", c.target}, {"weight", c.weight}});
    }
  } else {
    json facilities = json::array();
    for (const CostFunction& c : game.costs()) facilities.push_back({{"cost", cost_to_json(c)}});
    j["facilities"] = std::move(facilities);
    for (int i = 0; i < game.commodity_count(); ++i) {
      const Commodity& c = game.commodity(i);
      commodities.push_back({{"weight", c.weight}, {"actions", c.actions}});
    }
  }
  j["commodities"] = std::move(commodities);
  return j;
}

}  // namespace taxlearn
