// taxlearn: learn marginal-cost taxes from equilibrium feedback.
//
//   taxlearn run --pigou c=0.2,p=2 --eps 0.05 --beta 2 --out out/
//   taxlearn oracle --game tiny.json
//   taxlearn validate --game tiny.json --network braess.json

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "taxlearn/errors.hpp"
#include "taxlearn/io.hpp"
#include "taxlearn/oracles.hpp"
#include "taxlearn/taxdesign.hpp"
#include "taxlearn/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace taxlearn;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kProperty = 4, kSize = 5 };

struct PigouParams {
  double c = 0.0;
  double p = 0.0;
};

struct Source {
  std::string pigou;
  std::string game;
  std::string network;
};

struct RunConfig {
  Source source;
  double eps = 0.05;
  double beta = 0.0;
  int t_max = 0;
  double tol_eq = 0.0;
  int max_iters = 200000;
  std::string out = ".";
  bool trace_solver = false;
  bool reuse_strategy = false;
  bool allow_beta_misspec = false;
  std::vector<std::string> sweep;
  int jobs = 0;
  bool show_summary = false;
};

PigouParams parse_pigou(const std::string& text) {
  PigouParams p;
  bool have_c = false, have_p = false;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--pigou: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    double value;
    try {
      std::size_t used = 0;
      value = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--pigou: bad number in '" + item + "'");
    }
    if (key == "c") {
      p.c = value;
      have_c = true;
    } else if (key == "p") {
      p.p = value;
      have_p = true;
    } else {
      throw ConfigError("--pigou: unknown key '" + key + "'");
    }
  }
  if (!have_c || !have_p) throw ConfigError("--pigou needs both c and p");
  if (!(p.c > 0.0 && p.c <= 1.0)) throw ConfigError("--pigou: c must lie in (0,1]");
  if (!(p.p >= 1.0)) throw ConfigError("--pigou: p must be at least 1");
  return p;
}

int source_count(const Source& s) {
  return !s.pigou.empty() + !s.game.empty() + !s.network.empty();
}

Game load_source(const Source& s) {
  if (source_count(s) != 1) throw ConfigError("give exactly one of --pigou, --game, --network");
  if (!s.pigou.empty()) {
    const PigouParams p = parse_pigou(s.pigou);
    return make_pigou(p.c, p.p);
  }
  if (!s.network.empty()) {
    Game g = load_game_file(s.network);
    if (!g.is_network()) throw ConfigError(s.network + ": not a network game (no \"vertices\")");
    return g;
  }
  return load_game_file(s.game);
}

// Analytic for Pigou, grid search when the game is small enough, else nothing.
std::optional<double> optimum_for(const Source& s, const Game& game) {
  if (!s.pigou.empty()) {
    const PigouParams p = parse_pigou(s.pigou);
    return oracles::pigou_analytic(p.c, p.p).optimal_cost;
  }
  try {
    return oracles::optimal_social_cost(game).value;
  } catch (const SizeError&) {
    return std::nullopt;
  }
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

json run_one(const RunConfig& cfg, const Source& source, const fs::path& out_dir, std::ostream& log) {
  const Game game = load_source(source);
  const double required = guarantee_beta(game);
  const double beta = cfg.beta > 0.0 ? cfg.beta : std::max(required, cfg.eps);
  const bool misspecified = beta < required;
  if (misspecified && !cfg.allow_beta_misspec) {
    throw ConfigError("--beta " + num(beta) + " is below " + num(required) +
                      ", the larger of the costs' smoothness and u c'(u) at u = 1"
                      " (pass --allow-beta-misspec to run outside the guarantee)");
  }

  RunOptions ro;
  ro.eps = cfg.eps;
  ro.beta = beta;
  ro.t_max = cfg.t_max;
  ro.reuse_solver_strategy = cfg.reuse_strategy;
  ro.tol_eq = cfg.tol_eq > 0.0 ? cfg.tol_eq : default_tol_eq(cfg.eps, beta);
  SolverConfig sc;
  sc.tol_eq = ro.tol_eq;
  sc.max_iters = cfg.max_iters;
  sc.record_trace = cfg.trace_solver;

  std::vector<std::vector<SolverTraceRow>> solver_traces;
  const EquilibriumOracle base = make_solver_oracle(game, sc);
  const EquilibriumOracle oracle = [&](std::span<const PiecewiseLinear> taxes) {
    EquilibriumFeedback fb = base(taxes);
    if (cfg.trace_solver) solver_traces.push_back(fb.trace);
    return fb;
  };

  const RunResult result = run(game, oracle, ro);
  const std::optional<double> optimum = optimum_for(source, game);

  fs::create_directories(out_dir);
  {
    std::ofstream out = open_out(out_dir / "trace.csv");
    out << "round,social_cost,optimal_social_cost,gap\n";
    for (const RoundRecord& r : result.trace) {
      out << r.round << ',' << num(r.social_cost) << ','
          << (optimum ? num(*optimum) : "") << ','
          << (optimum ? num(r.social_cost - *optimum) : "") << '\n';
    }
  }
  {
    std::ofstream out = open_out(out_dir / "run_trace.csv");
    out << "round,phase,social_cost,facility,load,cost\n";
    auto rows = [&](int round, const char* phase, const LoadVector& y, const CostVector& c) {
      const std::string psi = num(social_cost(game, y));
      for (std::size_t f = 0; f < y.size(); ++f) {
        out << round << ',' << phase << ',' << psi << ',' << f << ',' << num(y[f]) << ','
            << num(c[f]) << '\n';
      }
    };
    for (const RoundRecord& r : result.trace) {
      rows(r.round, "primary", r.load, r.cost);
      if (r.probe) rows(r.round, "perturbed", r.probe->load, r.probe->cost);
    }
  }
  {
    std::ofstream out = open_out(out_dir / "probes.csv");
    out << "round,queries,unknown,known_total,certified_eps,facility,sign,branch,tax_value,"
           "displacement,retried,diagnostic\n";
    for (const RoundRecord& r : result.trace) {
      out << r.round << ',' << r.queries << ',' << r.unknown.size() << ',' << r.known_total_after
          << ',' << num(r.certified_eps) << ',';
      if (r.probe) {
        out << r.probe->facility << ',' << r.probe->sign << ',' << to_string(r.probe->branch) << ','
            << num(r.probe->tax_value) << ',' << num(r.probe->displacement) << ','
            << (r.probe->retried ? 1 : 0);
      } else {
        out << ",,certified,,,";
      }
      out << ",\"" << r.diagnostic << "\"\n";
    }
  }
  const std::vector<PiecewiseLinear> applied = result.plan.applied();
  for (std::size_t f = 0; f < applied.size(); ++f) {
    std::ofstream out = open_out(out_dir / ("tax_f" + std::to_string(f) + ".csv"));
    applied[f].write_csv(out);
  }
  if (cfg.trace_solver) {
    std::ofstream out = open_out(out_dir / "solver_trace.csv");
    out << "query,iteration,potential,fw_gap,residual\n";
    for (std::size_t q = 0; q < solver_traces.size(); ++q) {
      for (const SolverTraceRow& row : solver_traces[q]) {
        out << q + 1 << ',' << row.iteration << ',' << num(row.potential) << ','
            << num(row.fw_gap) << ',' << num(row.residual) << '\n';
      }
    }
  }

  const int F = game.facility_count();
  const double round_bound = 2.0 * F * beta / cfg.eps;
  const double gap_bound = 6.0 * cfg.eps * F + 10.0 * std::sqrt(2.0 * ro.tol_eq / cfg.eps);
  json summary;
  summary["termination"] = to_string(result.termination);
  summary["rounds"] = result.rounds;
  summary["queries"] = result.queries;
  summary["eps"] = cfg.eps;
  summary["beta"] = beta;
  summary["beta_misspecified"] = misspecified;
  summary["grid_resolution"] = result.state.resolution();
  summary["delta"] = result.state.delta;
  summary["tol_eq"] = ro.tol_eq;
  summary["final_social_cost"] = result.final_social_cost;
  summary["final_load"] = result.final_load;
  summary["theorem_round_bound"] = round_bound;
  summary["gap_bound"] = gap_bound;
  if (optimum) {
    const double gap = result.final_social_cost - *optimum;
    summary["optimal_social_cost"] = *optimum;
    summary["final_gap"] = gap;
    summary["bound_satisfied"] = result.termination == Termination::kSubroutineFalse &&
                                 result.rounds <= round_bound && gap <= gap_bound;
  } else {
    summary["optimal_social_cost"] = nullptr;
    summary["final_gap"] = nullptr;
    summary["bound_satisfied"] = nullptr;
  }
  if (!result.diagnostic.empty()) summary["diagnostic"] = result.diagnostic;
  {
    std::ofstream out = open_out(out_dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  log << out_dir.string() << ": " << to_string(result.termination) << " after " << result.rounds
      << " rounds";
  if (optimum) log << ", gap " << num(result.final_social_cost - *optimum);
  log << '\n';
  return summary;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("--sweep: bad number '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--sweep: empty list");
  return out;
}

// --sweep c=0.2,0.6,1 --sweep p=2,4 [--sweep eps=0.05,0.1]
int cmd_sweep(const RunConfig& cfg) {
  std::vector<double> cs, ps, epss{cfg.eps};
  for (const std::string& part : cfg.sweep) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ConfigError("--sweep: expected key=list, got '" + part + "'");
    const std::string key = part.substr(0, eq);
    const std::vector<double> values = parse_list(part.substr(eq + 1));
    if (key == "c") cs = values;
    else if (key == "p") ps = values;
    else if (key == "eps") epss = values;
    else throw ConfigError("--sweep: unknown key '" + key + "'");
  }
  if (cs.empty() || ps.empty()) throw ConfigError("--sweep needs c and p lists");

  struct Job {
    RunConfig cfg;
    Source source;
    fs::path dir;
  };
  std::vector<Job> jobs;
  for (double c : cs) {
    for (double p : ps) {
      for (double eps : epss) {
        Job job{cfg, {}, {}};
        job.cfg.eps = eps;
        job.cfg.beta = cfg.beta > 0.0 ? cfg.beta : 0.0;
        job.cfg.tol_eq = 0.0;
        job.source.pigou = "c=" + num(c) + ",p=" + num(p);
        parse_pigou(job.source.pigou);
        job.dir = fs::path(cfg.out) / ("c" + num(c) + "_p" + num(p) + "_eps" + num(eps));
        jobs.push_back(std::move(job));
      }
    }
  }

  std::vector<int> codes(jobs.size(), kOk);
  std::vector<std::string> logs(jobs.size());
  std::mutex next_mutex;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (next >= jobs.size()) return;
        k = next++;
      }
      std::ostringstream log;
      try {
        run_one(jobs[k].cfg, jobs[k].source, jobs[k].dir, log);
      } catch (const SolverError& e) {
        log << jobs[k].dir.string() << ": solver failure: " << e.what() << '\n';
        codes[k] = kSolver;
      } catch (const std::exception& e) {
        log << jobs[k].dir.string() << ": " << e.what() << '\n';
        codes[k] = kConfig;
      }
      logs[k] = log.str();
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t count =
      std::min<std::size_t>(jobs.size(), cfg.jobs > 0 ? static_cast<std::size_t>(cfg.jobs) : hw);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < count; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();

  int code = kOk;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    std::cout << logs[k];
    code = std::max(code, codes[k]);
  }
  return code;
}

int cmd_run(const RunConfig& cfg) {
  if (!(cfg.eps > 0.0)) throw ConfigError("--eps must be positive");
  if (!cfg.sweep.empty()) {
    if (source_count(cfg.source) != 0) throw ConfigError("--sweep builds its own Pigou games");
    return cmd_sweep(cfg);
  }
  const json summary = run_one(cfg, cfg.source, cfg.out, std::cout);
  if (cfg.show_summary) std::cout << summary.dump(2) << '\n';
  const std::string term = summary["termination"];
  if (term == "aborted_degenerate" || term == "aborted_locality") return kProperty;
  return kOk;
}

int cmd_oracle(const Source& source, const std::string& quantity_in, double eps) {
  const Game game = load_source(source);
  std::string quantity = quantity_in;
  if (quantity.empty()) quantity = source.pigou.empty() ? "equilibrium" : "optimum";

  json out;
  if (quantity == "optimum") {
    if (!source.pigou.empty()) {
      const PigouParams p = parse_pigou(source.pigou);
      const auto s = oracles::pigou_analytic(p.c, p.p);
      oracles::OracleReport r{"optimal_social_cost", s.optimal_cost, "analytic", 0.0,
                              {1.0 - s.optimal_load, s.optimal_load}};
      out = r.to_json();
    } else {
      out = oracles::optimal_social_cost(game).to_json();
    }
  } else if (quantity == "equilibrium") {
    std::vector<PiecewiseLinear> taxes;
    if (eps > 0.0) {
      for (int f = 0; f < game.facility_count(); ++f) taxes.push_back(PiecewiseLinear::line(0.0, eps));
    }
    out = oracles::equilibrium_by_enumeration(game, taxes).to_json();
  } else if (quantity == "poa") {
    const double poa = oracles::price_of_anarchy(game);
    out = oracles::OracleReport{"price_of_anarchy", poa,
                                game.total_actions() <= 2 ? "grid_search_1d" : "grid_search_nd",
                                0.0, {}}
              .to_json();
  } else {
    throw ConfigError("--quantity must be optimum, equilibrium or poa");
  }
  std::cout << out.dump(2) << '\n';
  return kOk;
}

struct ValidateConfig {
  std::vector<std::string> games;
  std::vector<std::string> pigou;
  int networks = 50;
  double eps = 0.05;
  std::uint64_t seed = 1;
  bool json_out = false;
};

int cmd_validate(const ValidateConfig& cfg) {
  json report = json::array();
  bool all_passed = true;
  bool rejected = false;
  auto emit = [&](const std::string& subject, const oracles::PropertyResult& p) {
    all_passed = all_passed && p.passed;
    report.push_back({{"subject", subject}, {"property", p.name}, {"passed", p.passed},
                      {"detail", p.detail}});
    if (!cfg.json_out) {
      std::cout << (p.passed ? "PASS " : "FAIL ") << subject << ' ' << p.name << ": " << p.detail
                << '\n';
    }
  };

  std::vector<std::pair<std::string, std::optional<Game>>> subjects;
  for (const std::string& path : cfg.games) {
    try {
      subjects.emplace_back(path, load_game_file(path));
    } catch (const InstanceError& e) {
      rejected = true;
      emit(path, {"instance_assumptions", false, std::string("rejected at construction: ") + e.what()});
    }
  }
  for (const std::string& text : cfg.pigou) {
    const PigouParams p = parse_pigou(text);
    subjects.emplace_back("pigou(" + text + ")", make_pigou(p.c, p.p));
  }
  if (cfg.games.empty() && cfg.pigou.empty()) subjects.emplace_back("pigou(c=0.6,p=2)", make_pigou(0.6, 2));

  for (auto& [name, game] : subjects) {
    oracles::ValidateOptions vo;
    vo.eps = cfg.eps;
    vo.seed = cfg.seed;
    for (const auto& p : oracles::validate_game(*game, vo)) emit(name, p);
  }
  if (cfg.networks > 0) {
    emit("random_networks", oracles::check_network_sweep_equivalence(cfg.networks, 8, cfg.seed));
  }
  if (cfg.json_out) std::cout << report.dump(2) << '\n';
  if (rejected) return kConfig;
  return all_passed ? kOk : kProperty;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn marginal-cost taxes for nonatomic congestion games from equilibrium feedback"};
  app.require_subcommand(1);

  RunConfig run_cfg;
  auto* run_cmd = app.add_subcommand("run", "Run the tax-design loop and write traces");
  run_cmd->add_option("--pigou", run_cfg.source.pigou, "Pigou instance, e.g. c=0.2,p=2");
  run_cmd->add_option("--game", run_cfg.source.game, "Game JSON file");
  run_cmd->add_option("--network", run_cfg.source.network, "Network game JSON file");
  run_cmd->add_option("--eps", run_cfg.eps, "Accuracy eps")->capture_default_str();
  run_cmd->add_option("--beta", run_cfg.beta, "Smoothness bound (default: smallest value the guarantee covers)");
  run_cmd->add_option("--tmax", run_cfg.t_max, "Round budget (default from eps, beta)");
  run_cmd->add_option("--tol-eq", run_cfg.tol_eq, "Solver tolerance (default min(1e-8, delta/100))");
  run_cmd->add_option("--max-iters", run_cfg.max_iters, "Solver iteration cap")->capture_default_str();
  run_cmd->add_option("--out", run_cfg.out, "Output directory")->capture_default_str();
  run_cmd->add_flag("--trace-solver", run_cfg.trace_solver, "Write solver_trace.csv");
  run_cmd->add_flag("--reuse-strategy", run_cfg.reuse_strategy,
                    "Use the solver's strategy instead of decomposing the load");
  run_cmd->add_flag("--allow-beta-misspec", run_cfg.allow_beta_misspec,
                    "Accept --beta below the game's smoothness (outside the guarantee)");
  run_cmd->add_option("--sweep", run_cfg.sweep, "Pigou grid axis, repeatable: c=0.2,0.6,1 p=2,4 eps=0.05");
  run_cmd->add_flag("--show-summary", run_cfg.show_summary, "Print summary.json to stdout");
  run_cmd->add_option("--jobs", run_cfg.jobs, "Worker threads for --sweep");

  Source oracle_source;
  std::string quantity;
  double oracle_eps = 0.0;
  auto* oracle_cmd = app.add_subcommand("oracle", "Print a brute-force oracle report as JSON");
  oracle_cmd->add_option("--pigou", oracle_source.pigou, "Pigou instance, e.g. c=0.2,p=2");
  oracle_cmd->add_option("--game", oracle_source.game, "Game JSON file");
  oracle_cmd->add_option("--network", oracle_source.network, "Network game JSON file");
  oracle_cmd->add_option("--quantity", quantity, "optimum | equilibrium | poa");
  oracle_cmd->add_option("--eps", oracle_eps, "Equilibrium under the tax eps*u (default untaxed)");

  ValidateConfig val_cfg;
  auto* validate_cmd = app.add_subcommand("validate", "Run the property suite");
  validate_cmd->add_option("--game,--network", val_cfg.games, "Game JSON files");
  validate_cmd->add_option("--pigou", val_cfg.pigou, "Pigou instances");
  validate_cmd->add_option("--networks", val_cfg.networks, "Random networks for the sweep check")
      ->capture_default_str();
  validate_cmd->add_option("--eps", val_cfg.eps, "Accuracy eps")->capture_default_str();
  validate_cmd->add_option("--seed", val_cfg.seed, "Seed for randomized checks")->capture_default_str();
  validate_cmd->add_flag("--json", val_cfg.json_out, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run_cfg);
    if (*oracle_cmd) return cmd_oracle(oracle_source, quantity, oracle_eps);
    return cmd_validate(val_cfg);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const SizeError& e) {
    std::cerr << "size error: " << e.what() << '\n';
    return kSize;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InstanceError& e) {
    std::cerr << "instance rejected: " << e.what() << '\n';
    return kConfig;
  } catch (const ArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
}
