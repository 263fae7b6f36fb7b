#pragma once

#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlg/catalog.hpp"
#include "nlg/classical.hpp"
#include "nlg/json_io.hpp"

namespace nlg::cli {

using io::json;

inline double round12(double v) {
  const double r = std::round(v * 1e12) / 1e12;
  return r == 0.0 ? 0.0 : r;  // normalize -0
}

struct Computation {
  std::string name;
  std::string method;  // enumeration | lp | sdp | born-rule | seesaw
  std::optional<std::string> value_rational;
  double value = 0.0;
  double tolerance = 0.0;
  json extra;
  double wall_ms = 0.0;
  bool converged = true;
};

struct Report {
  std::string game;
  std::string hash;
  std::vector<Computation> computations;

  json to_json(bool include_timing) const {
    json j;
    j["game"] = game;
    j["hash"] = hash;
    json comps = json::array();
    for (const auto& c : computations) {
      json cj;
      cj["name"] = c.name;
      cj["method"] = c.method;
      if (c.value_rational) cj["value"] = *c.value_rational;
      cj["value_float"] = round12(c.value);
      cj["tolerance"] = c.tolerance;
      cj["converged"] = c.converged;
      if (!c.extra.is_null()) cj["detail"] = c.extra;
      if (include_timing) cj["wall_ms"] = c.wall_ms;
      comps.push_back(cj);
    }
    j["computations"] = comps;
    return j;
  }
};

namespace detail {

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

struct GameFlags {
  std::string game;
  std::string game_file;
  std::string graph_file;
  int colors = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--game", game, "builtin game: chsh | ghz | magic_square | coloring");
    cmd->add_option("--game-file", game_file, "game description JSON file");
    cmd->add_option("--graph", graph_file, "graph JSON for coloring games");
    cmd->add_option("--colors", colors, "color count for coloring games");
  }

  Game resolve() const {
    if (!game_file.empty()) return io::game_from_json(io::load_file(game_file));
    if (game.empty())
      throw std::invalid_argument("no game given: use --game or --game-file");
    if (game == "coloring") {
      if (graph_file.empty() || colors <= 0)
        throw std::invalid_argument("coloring games need --graph <file> and --colors <c>");
      return coloring_game(io::graph_from_json(io::load_file(graph_file)), colors);
    }
    return catalog_game(game);
  }
};

inline json witness_json(const DeterministicStrategy& s, const Scenario& sc) {
  json w;
  for (int p = 0; p < sc.num_parties(); ++p) {
    json m;
    for (int x = 0; x < sc.num_questions(p); ++x)
      m[sc.parties()[p].questions[x]] = sc.parties()[p].answers[s.responses[p][x]];
    w[sc.parties()[p].name] = m;
  }
  return w;
}

inline QuantumStrategy resolve_strategy(const std::string& spec, const Game& g) {
  if (spec.empty()) throw std::invalid_argument("no strategy given: use --strategy");
  if (spec == "canonical") return catalog_canonical_strategy(g.name());
  return io::strategy_from_json(io::load_file(spec), g.scenario());
}

inline npa::Basis parse_basis(const std::string& s) {
  if (s == "projector") return npa::Basis::Projector;
  if (s == "dichotomic") return npa::Basis::Dichotomic;
  throw std::invalid_argument("unknown basis '" + s + "' (projector | dichotomic)");
}

}  // namespace detail

// Command-line front end; returns the process exit code (0 ok, 1 input
// error, 2 solver non-convergence).
inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"nonlocal game workbench"};
  app.require_subcommand(1);

  bool as_table = false;
  bool no_timing = false;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  app.add_flag("--table", as_table, "human-readable table output");
  app.add_flag("--json", "JSON output (default)");
  app.add_flag("--no-timing", no_timing, "omit wall times from the report");
  app.add_option("--seed", seed, "seed for randomized routines (default 0)");
  app.add_option("--tol", tol, "solver tolerance");

  // --- value ---------------------------------------------------------------
  auto* value = app.add_subcommand("value", "compute a game value");
  detail::GameFlags vf;
  std::int64_t cap = kDefaultStrategyCap;
  int npa_level = 1;
  std::string basis = "projector";
  std::string dump_file;
  auto* v_classical = value->add_subcommand("classical", "exact classical value by enumeration");
  auto* v_ns = value->add_subcommand("ns", "no-signaling value by LP");
  auto* v_npa = value->add_subcommand("npa", "NPA upper bound by SDP");
  for (auto* c : {v_classical, v_ns, v_npa}) vf.attach(c);
  v_classical->add_option("--cap", cap, "deterministic strategy cap");
  v_npa->add_option("--npa-level", npa_level, "hierarchy level (default 1, or NLG_NPA_LEVEL)");
  v_npa->add_option("--basis", basis, "projector | dichotomic");
  v_npa->add_option("--dump", dump_file, "write the moment problem JSON to this file");

  // --- eval quantum ----------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "evaluate an explicit strategy");
  auto* e_quantum = eval->add_subcommand("quantum", "Born-rule value of a quantum strategy");
  detail::GameFlags ef;
  ef.attach(e_quantum);
  std::string strategy_spec;
  e_quantum->add_option("--strategy", strategy_spec,
                        "strategy JSON file, or 'canonical' for builtin games");

  // --- bell eval -------------------------------------------------------------
  auto* bell = app.add_subcommand("bell", "Bell functional operations");
  auto* b_eval = bell->add_subcommand("eval", "evaluate a functional on a behavior");
  detail::GameFlags bf;
  bf.attach(b_eval);
  std::string functional_file, behavior_file;
  b_eval->add_option("--functional", functional_file, "functional JSON file")->required();
  b_eval->add_option("--behavior", behavior_file, "behavior JSON file")->required();

  // --- membership ------------------------------------------------------------
  auto* membership = app.add_subcommand("membership", "local-polytope membership test");
  detail::GameFlags mf;
  mf.attach(membership);
  std::string m_behavior;
  membership->add_option("--behavior", m_behavior, "behavior JSON file")->required();
  membership->add_option("--cap", cap, "deterministic strategy cap");

  // --- catalog ---------------------------------------------------------------
  auto* catalog = app.add_subcommand("catalog", "builtin game catalog");
  auto* c_list = catalog->add_subcommand("list", "list builtin games");

  // --- report ----------------------------------------------------------------
  auto* report = app.add_subcommand("report", "multi-model comparison");
  auto* r_all = report->add_subcommand(
      "all", "classical / explicit-quantum / NPA / no-signaling ladder");
  detail::GameFlags rf;
  rf.attach(r_all);
  int r_level = 0;
  r_all->add_option("--npa-level", r_level, "hierarchy level (default 1, or NLG_NPA_LEVEL)");

  // --- hardy -----------------------------------------------------------------
  auto* hardy = app.add_subcommand("hardy", "Hardy constraint problem");
  int restarts = 50;
  hardy->add_option("--restarts", restarts, "random restarts for the optimizer (default 50)");

  // Global flags remain usable after any subcommand.
  for (auto* sub : app.get_subcommands({})) {
    sub->fallthrough();
    for (auto* nested : sub->get_subcommands({})) nested->fallthrough();
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  const int default_level = [&] {
    if (const char* env = std::getenv("NLG_NPA_LEVEL")) return std::atoi(env);
    return 1;
  }();
  if (r_level <= 0) r_level = default_level;

  try {
    int exit_code = 0;
    json output;

    if (v_classical->parsed()) {
      const Game g = vf.resolve();
      detail::Timer t;
      const ClassicalResult r = classical_value(g, cap);
      output["game"] = g.name();
      output["hash"] = io::game_hash(g);
      output["value"] = r.value.str();
      output["value_float"] = round12(r.value.to_double());
      output["witness"] = detail::witness_json(r.witness, g.scenario());
      output["strategies_searched"] = r.strategies_searched;
      output["method"] = "enumeration";
      if (!no_timing) output["wall_ms"] = t.ms();
    } else if (v_ns->parsed()) {
      const Game g = vf.resolve();
      detail::Timer t;
      const NsResult r = ns_value_detailed(g);
      output["game"] = g.name();
      output["hash"] = io::game_hash(g);
      output["value_float"] = round12(r.value);
      output["method"] = "lp";
      output["tolerance"] = 1e-9;
      output["duality_gap"] = round12(std::abs(r.lp.value - r.lp.dual_value));
      if (!no_timing) output["wall_ms"] = t.ms();
    } else if (v_npa->parsed()) {
      const Game g = vf.resolve();
      detail::Timer t;
      npa::NpaOptions opts;
      opts.tol = tol;
      const int level = npa_level > 0 ? npa_level : default_level;
      const npa::NpaResult r = npa::npa_bound(g, level, detail::parse_basis(basis), opts);
      if (!dump_file.empty()) io::save_file(dump_file, io::moment_problem_to_json(r.problem));
      output["game"] = g.name();
      output["hash"] = io::game_hash(g);
      output["level"] = level;
      output["basis"] = basis;
      output["value_float"] = round12(r.bound);
      output["sdp_value"] = round12(r.sdp_value);
      output["method"] = "sdp";
      output["tolerance"] = tol;
      output["converged"] = r.converged;
      output["residuals"] = {{"primal", r.sdp.primal_residual}, {"dual", r.sdp.dual_residual}};
      if (const auto cf = correlator_form(functional_of_game(g)); cf && std::abs(cf->constant) > 0) {
        // Bell-value form of the bound when the game has one.
        double bscale = 0.0;
        for (double b : cf->beta) bscale = std::max(bscale, std::abs(b));
        if (bscale > 0)
          output["bell_value_bound"] = round12((r.bound - cf->constant) / bscale);
      }
      if (!r.converged) exit_code = 2;
      if (!no_timing) output["wall_ms"] = t.ms();
    } else if (e_quantum->parsed()) {
      const Game g = ef.resolve();
      detail::Timer t;
      const QuantumStrategy s = detail::resolve_strategy(strategy_spec, g);
      const Behavior b = strategy_behavior(s, g.scenario());
      output["game"] = g.name();
      output["hash"] = io::game_hash(g);
      output["value_float"] = round12(game_value(g, b));
      output["method"] = "born-rule";
      output["no_signaling_defect"] = b.no_signaling_defect();
      if (!no_timing) output["wall_ms"] = t.ms();
    } else if (b_eval->parsed()) {
      detail::Timer t;
      // The scenario comes from --game / --game-file when given, else from a
      // "parties" block embedded in the functional file.
      const json fj = io::load_file(functional_file);
      std::optional<Game> g;
      Scenario sc;
      if (!bf.game.empty() || !bf.game_file.empty()) {
        g = bf.resolve();
        sc = g->scenario();
      } else if (fj.contains("parties")) {
        sc = Scenario(io::parties_from_json(fj.at("parties")));
      } else {
        throw std::invalid_argument(
            "bell eval needs --game/--game-file or a functional file with a parties block");
      }
      const BellFunctional f = io::functional_from_json(fj, sc);
      const Behavior b = io::behavior_from_json(io::load_file(behavior_file), sc);
      output["value_float"] = round12(eval_functional(f, b));
      output["method"] = "linear";
      if (g) {
        output["game"] = g->name();
        if (const auto af = fit_affine_to_game(f, *g)) {
          output["affine_to_game"] = {{"offset", round12(af->first)},
                                      {"scale", round12(af->second)}};
        }
      }
      if (!no_timing) output["wall_ms"] = t.ms();
    } else if (membership->parsed()) {
      const Game g = mf.resolve();
      detail::Timer t;
      const Behavior b = io::behavior_from_json(io::load_file(m_behavior), g.scenario());
      const MembershipResult r = local_membership(b, g.scenario(), cap);
      output["game"] = g.name();
      output["in_local"] = r.in_local;
      output["method"] = "lp";
      output["tolerance"] = 1e-9;
      if (r.in_local) {
        json comps = json::array();
        for (const auto& [w, strat] : r.model.components)
          comps.push_back(
              {{"weight", w.str()}, {"strategy", detail::witness_json(strat, g.scenario())}});
        output["model"] = comps;
      } else {
        output["functional"] = io::functional_to_json(r.functional);
        output["local_bound"] = round12(r.local_bound);
        output["behavior_value"] = round12(r.behavior_value);
      }
      if (!no_timing) output["wall_ms"] = t.ms();
    } else if (c_list->parsed()) {
      json games = json::array();
      for (const auto& name : catalog_names()) games.push_back(name);
      games.push_back("coloring (--graph <file> --colors <c>)");
      output["games"] = games;
    } else if (r_all->parsed()) {
      const Game g = rf.resolve();
      Report rep;
      rep.game = g.name();
      rep.hash = io::game_hash(g);
      {
        detail::Timer t;
        const ClassicalResult r = classical_value(g, cap);
        rep.computations.push_back({"classical", "enumeration", r.value.str(),
                                    r.value.to_double(), 0.0, json(), t.ms(), true});
      }
      {
        detail::Timer t;
        Computation c;
        c.name = "quantum-explicit";
        try {
          const QuantumStrategy s = catalog_canonical_strategy(g.name());
          c.method = "born-rule";
          c.value = winning_probability(g, s);
          c.tolerance = 1e-12;
        } catch (const std::invalid_argument&) {
          std::vector<int> dims;
          for (int p = 0; p < g.scenario().num_parties(); ++p)
            dims.push_back(std::max(2, g.scenario().num_answers(p)));
          const auto r = seesaw_refine(g, random_strategy(g.scenario(), dims, seed), 100, 1e-10);
          c.method = "seesaw";
          c.value = r.value;
          c.tolerance = 1e-10;
          c.converged = r.converged;
          c.extra = {{"seed", seed}, {"iterations", r.iterations}};
        }
        c.wall_ms = t.ms();
        rep.computations.push_back(c);
      }
      {
        detail::Timer t;
        npa::NpaOptions opts;
        opts.tol = tol;
        const npa::NpaResult r = npa::npa_bound(g, r_level, npa::Basis::Projector, opts);
        Computation c;
        c.name = "npa-" + std::to_string(r_level);
        c.method = "sdp";
        c.value = r.bound;
        c.tolerance = tol;
        c.converged = r.converged;
        c.extra = {{"primal_residual", r.sdp.primal_residual},
                   {"dual_residual", r.sdp.dual_residual}};
        c.wall_ms = t.ms();
        if (!r.converged) exit_code = 2;
        rep.computations.push_back(c);
      }
      {
        detail::Timer t;
        const NsResult r = ns_value_detailed(g);
        rep.computations.push_back(
            {"no-signaling", "lp", std::nullopt, r.value, 1e-9, json(), t.ms(), true});
      }
      if (as_table) {
        std::ostringstream os;
        os << "game: " << rep.game << " (hash " << rep.hash << ")\n";
        os << "  model              value        method\n";
        for (const auto& c : rep.computations) {
          std::ostringstream val;
          val.precision(6);
          val << std::fixed << c.value;
          os << "  " << c.name << std::string(c.name.size() < 19 ? 19 - c.name.size() : 1, ' ')
             << val.str() << "     " << c.method;
          if (c.value_rational) os << " (exact " << *c.value_rational << ")";
          os << "\n";
        }
        out << os.str();
        return exit_code;
      }
      output = rep.to_json(!no_timing);
    } else if (hardy->parsed()) {
      detail::Timer t;
      const HardyOptimum r = hardy_optimize(seed, restarts);
      const HardyCheck base =
          hardy_check(hardy_interferometric_config().state,
                      hardy_interferometric_config().measurements);
      output["interferometric_probability"] = round12(base.paradox_probability);
      output["best_probability"] = round12(r.best_probability);
      output["restarts"] = restarts;
      output["accepted_restarts"] = r.accepted_restarts;
      output["seed"] = seed;
      output["method"] = "penalty-search";
      output["tolerance"] = 1e-9;
      if (!no_timing) output["wall_ms"] = t.ms();
    } else {
      err << app.help();
      return 1;
    }

    out << output.dump(2) << "\n";
    return exit_code;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace nlg::cli
