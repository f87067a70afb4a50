#pragma once

#include <string>

#include <json.hpp>

#include "taxlearn/cost.hpp"
#include "taxlearn/game.hpp"

namespace taxlearn {

/// {"kind":"constant","value":v} | {"kind":"affine","intercept":a,"slope":b} |
/// {"kind":"polynomial","coefficients":[a0,a1,...]} |
/// {"kind":"monomial","scale":s,"exponent":p}
CostFunction cost_from_json(const nlohmann::json& j);
nlohmann::json cost_to_json(const CostFunction& cost);

/// Explicit game:
///   {"facilities":[{"cost":{...}}], "commodities":[{"weight":w,"actions":[[0],[1,2]]}]}
/// Network game:
///   {"vertices":n, "edges":[{"from":u,"to":v,"cost":{...}}],
///    "commodities":[{"source":s,"target":t,"weight":w}]}
/// Malformed documents raise ConfigError; rejected instances raise InstanceError.
Game game_from_json(const nlohmann::json& j);
Game load_game_file(const std::string& path);

nlohmann::json game_to_json(const Game& game);

}  // namespace taxlearn
