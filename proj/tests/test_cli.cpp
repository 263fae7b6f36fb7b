#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nlg/cli.hpp"
#include "nlg/json_io.hpp"
#include "test_util.hpp"

using namespace nlg;
using io::json;

namespace {

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
  json parsed;
};

RunResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  RunResult r;
  r.code = cli::run(std::move(args), out, err);
  r.out = out.str();
  r.err = err.str();
  if (!r.out.empty() && (r.out[0] == '{' || r.out[0] == '[')) r.parsed = json::parse(r.out);
  return r;
}

std::string temp_path(const std::string& name) {
  return std::string("cli_test_") + name;
}

}  // namespace

TEST_CASE("catalog list") {
  const RunResult r = run_cli({"catalog", "list"});
  CHECK(r.code == 0);
  CHECK(r.out.find("chsh") != std::string::npos);
  CHECK(r.out.find("magic_square") != std::string::npos);
}

TEST_CASE("value classical --game chsh") {
  const RunResult r = run_cli({"value", "classical", "--game", "chsh"});
  REQUIRE(r.code == 0);
  CHECK(r.parsed.at("value").get<std::string>() == "3/4");
  CHECK(r.parsed.at("value_float").get<double>() == doctest::Approx(0.75));
  CHECK(r.parsed.contains("witness"));
  CHECK(r.parsed.at("method") == "enumeration");
}

TEST_CASE("value ns and npa") {
  const RunResult ns = run_cli({"value", "ns", "--game", "chsh"});
  REQUIRE(ns.code == 0);
  CHECK(ns.parsed.at("value_float").get<double>() == doctest::Approx(1.0).epsilon(1e-8));

  const RunResult npa =
      run_cli({"value", "npa", "--game", "chsh", "--npa-level", "1", "--basis", "dichotomic"});
  REQUIRE(npa.code == 0);
  CHECK(npa.parsed.at("value_float").get<double>() ==
        doctest::Approx((2 + std::sqrt(2.0)) / 4).epsilon(1e-5));
  CHECK(npa.parsed.at("bell_value_bound").get<double>() ==
        doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-4));
}

TEST_CASE("eval quantum with the canonical strategy") {
  const RunResult r = run_cli({"eval", "quantum", "--game", "chsh", "--strategy", "canonical"});
  REQUIRE(r.code == 0);
  CHECK(r.parsed.at("value_float").get<double>() ==
        doctest::Approx((2 + std::sqrt(2.0)) / 4).epsilon(1e-10));
}

TEST_CASE("report all --game chsh reproduces the comparison table") {
  const RunResult r =
      run_cli({"report", "all", "--game", "chsh", "--npa-level", "1", "--no-timing"});
  REQUIRE(r.code == 0);
  const auto& comps = r.parsed.at("computations");
  REQUIRE(comps.size() == 4);
  CHECK(comps[0].at("value") == "3/4");
  CHECK(comps[0].at("value_float").get<double>() == doctest::Approx(0.75));
  CHECK(comps[1].at("value_float").get<double>() ==
        doctest::Approx((2 + std::sqrt(2.0)) / 4).epsilon(1e-9));
  CHECK(comps[2].at("value_float").get<double>() ==
        doctest::Approx((2 + std::sqrt(2.0)) / 4).epsilon(1e-5));
  CHECK(comps[3].at("value_float").get<double>() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("report all --game magic_square") {
  const RunResult r = run_cli({"report", "all", "--game", "magic_square", "--no-timing"});
  REQUIRE(r.code == 0);
  const auto& comps = r.parsed.at("computations");
  CHECK(comps[0].at("value") == "8/9");
  CHECK(comps[1].at("value_float").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(comps[2].at("value_float").get<double>() == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(comps[3].at("value_float").get<double>() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("reports are byte-identical across runs") {
  const RunResult a =
      run_cli({"report", "all", "--game", "chsh", "--npa-level", "1", "--no-timing"});
  const RunResult b =
      run_cli({"report", "all", "--game", "chsh", "--npa-level", "1", "--no-timing"});
  CHECK(a.out == b.out);

  const RunResult t = run_cli({"report", "all", "--game", "chsh", "--table"});
  CHECK(t.code == 0);
  CHECK(t.out.find("classical") != std::string::npos);
}

TEST_CASE("malformed game file: exit 1 naming the weight") {
  const std::string path = temp_path("bad_game.json");
  {
    std::ofstream f(path);
    f << R"({"parties":[{"questions":["0","1"],"answers":["0","1"]},)"
      << R"({"questions":["0","1"],"answers":["0","1"]}],)"
      << R"("pi":[{"q":["0","0"],"w":"-1/4"},{"q":["0","1"],"w":"5/4"}],)"
      << R"("predicate":{"type":"xor","f":[0,0,0,1]}})";
  }
  const RunResult r = run_cli({"value", "classical", "--game-file", path});
  CHECK(r.code == 1);
  CHECK(r.err.find("-1/4") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("unknown flags exit 1 with usage") {
  const RunResult r = run_cli({"value", "classical", "--game", "chsh", "--frobnicate"});
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("missing game is an input error") {
  const RunResult r = run_cli({"value", "classical"});
  CHECK(r.code == 1);
}

TEST_CASE("game JSON round trip") {
  for (const std::string name : {"chsh", "ghz", "magic_square"}) {
    const Game g = catalog_game(name);
    const Game back = io::game_from_json(io::game_to_json(g));
    CHECK(back.scenario() == g.scenario());
    REQUIRE(back.promise_size() == g.promise_size());
    for (int i = 0; i < g.promise_size(); ++i) {
      CHECK(back.pi()[i].first == g.pi()[i].first);
      CHECK(back.pi()[i].second == g.pi()[i].second);
      for (std::int64_t a = 0; a < g.scenario().joint_answers(); ++a)
        CHECK(back.wins(i, a) == g.wins(i, a));
    }
  }
}

TEST_CASE("builtin game file") {
  const std::string path = temp_path("builtin.json");
  {
    std::ofstream f(path);
    f << R"({"predicate":{"type":"builtin","name":"ghz"}})";
  }
  const RunResult r = run_cli({"value", "classical", "--game-file", path});
  REQUIRE(r.code == 0);
  CHECK(r.parsed.at("value") == "3/4");
  std::remove(path.c_str());
}

TEST_CASE("behavior and strategy files through the CLI") {
  const Game g = chsh_game();
  const QuantumStrategy s = chsh_canonical_strategy();
  const std::string spath = temp_path("strategy.json");
  const std::string bpath = temp_path("behavior.json");
  io::save_file(spath, io::strategy_to_json(s, g.scenario()));
  io::save_file(bpath, io::behavior_to_json(strategy_behavior(s, g.scenario())));

  const RunResult eq = run_cli({"eval", "quantum", "--game", "chsh", "--strategy", spath});
  REQUIRE(eq.code == 0);
  CHECK(eq.parsed.at("value_float").get<double>() ==
        doctest::Approx((2 + std::sqrt(2.0)) / 4).epsilon(1e-10));

  const RunResult mem = run_cli({"membership", "--game", "chsh", "--behavior", bpath});
  REQUIRE(mem.code == 0);
  CHECK_FALSE(mem.parsed.at("in_local").get<bool>());
  CHECK(mem.parsed.at("local_bound").get<double>() == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(mem.parsed.at("behavior_value").get<double>() ==
        doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-6));

  // A deterministic behavior certifies local with a decomposition.
  DeterministicStrategy det;
  det.responses = {{0, 0}, {0, 0}};
  io::save_file(bpath, io::behavior_to_json(behavior_of_deterministic(det, g.scenario())));
  const RunResult mem2 = run_cli({"membership", "--game", "chsh", "--behavior", bpath});
  REQUIRE(mem2.code == 0);
  CHECK(mem2.parsed.at("in_local").get<bool>());

  std::remove(spath.c_str());
  std::remove(bpath.c_str());
}

TEST_CASE("bell eval through files") {
  const Game g = chsh_game();
  const BellFunctional s = correlator_functional(g.scenario(), {1, 1, 1, -1});
  const std::string fpath = temp_path("functional.json");
  const std::string bpath = temp_path("behavior2.json");
  io::save_file(fpath, io::functional_to_json(s));
  io::save_file(bpath,
                io::behavior_to_json(strategy_behavior(chsh_canonical_strategy(), g.scenario())));
  const RunResult r =
      run_cli({"bell", "eval", "--game", "chsh", "--functional", fpath, "--behavior", bpath});
  REQUIRE(r.code == 0);
  CHECK(r.parsed.at("value_float").get<double>() ==
        doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-9));
  CHECK(r.parsed.at("affine_to_game").at("offset").get<double>() == doctest::Approx(0.5));
  CHECK(r.parsed.at("affine_to_game").at("scale").get<double>() == doctest::Approx(0.125));

  // Saved functionals embed their scenario, so --game is optional.
  const RunResult standalone =
      run_cli({"bell", "eval", "--functional", fpath, "--behavior", bpath});
  REQUIRE(standalone.code == 0);
  CHECK(standalone.parsed.at("value_float").get<double>() ==
        doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-9));

  std::remove(fpath.c_str());
  std::remove(bpath.c_str());
}

TEST_CASE("functional JSON round trip") {
  const BellFunctional f = functional_of_game(ghz_game());
  const BellFunctional back = io::functional_from_json(io::functional_to_json(f), f.scenario);
  for (std::int64_t q = 0; q < f.scenario.joint_questions(); ++q)
    for (std::int64_t a = 0; a < f.scenario.joint_answers(); ++a)
      CHECK(back.coeff(q, a) == doctest::Approx(f.coeff(q, a)).epsilon(1e-15));
}

TEST_CASE("npa problem dump is byte-stable") {
  const std::string p1 = temp_path("npa1.json"), p2 = temp_path("npa2.json");
  const RunResult a = run_cli({"value", "npa", "--game", "chsh", "--dump", p1, "--no-timing"});
  const RunResult b = run_cli({"value", "npa", "--game", "chsh", "--dump", p2, "--no-timing"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  std::ifstream f1(p1), f2(p2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  CHECK_FALSE(s1.str().empty());
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("coloring through the CLI") {
  const std::string gpath = temp_path("k3.json");
  io::save_file(gpath, io::graph_to_json(GraphSpec::complete(3)));
  const RunResult r =
      run_cli({"value", "classical", "--game", "coloring", "--graph", gpath, "--colors", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.parsed.at("value") == "1");
  std::remove(gpath.c_str());
}

TEST_CASE("hardy subcommand") {
  const RunResult r = run_cli({"hardy", "--restarts", "0"});
  REQUIRE(r.code == 0);
  CHECK(r.parsed.at("best_probability").get<double>() == doctest::Approx(1.0 / 16));
  CHECK(r.parsed.at("interferometric_probability").get<double>() == doctest::Approx(1.0 / 16));
}
