#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nlg/bell.hpp"
#include "nlg/catalog.hpp"
#include "nlg/classical.hpp"
#include "nlg/quantum.hpp"
#include "test_util.hpp"

using namespace nlg;

namespace {

const double kSqrt2 = std::sqrt(2.0);

BellFunctional chsh_functional() {
  return correlator_functional(chsh_game().scenario(), {1, 1, 1, -1});
}

BellFunctional mermin_functional() {
  const Scenario sc = ghz_game().scenario();
  std::vector<double> beta(sc.joint_questions(), 0.0);
  beta[sc.pack_question({0, 0, 0})] = 1.0;
  beta[sc.pack_question({0, 1, 1})] = -1.0;
  beta[sc.pack_question({1, 0, 1})] = -1.0;
  beta[sc.pack_question({1, 1, 0})] = -1.0;
  return correlator_functional(sc, beta);
}

double max_deterministic(const BellFunctional& f) {
  double best = -1e300;
  for_each_deterministic(f.scenario, 1000000, [&](const DeterministicStrategy& s) {
    best = std::max(best, eval_functional(f, s));
  });
  return best;
}

}  // namespace

TEST_CASE("CHSH functional values") {
  const BellFunctional s = chsh_functional();
  const Behavior quantum = strategy_behavior(chsh_canonical_strategy(), s.scenario);
  CHECK(eval_functional(s, quantum) == doctest::Approx(2 * kSqrt2).epsilon(1e-10));
  CHECK(max_deterministic(s) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("Mermin functional values") {
  const BellFunctional m = mermin_functional();
  const Behavior perfect = strategy_behavior(ghz_canonical_strategy(), m.scenario);
  CHECK(eval_functional(m, perfect) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(max_deterministic(m) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("functional_of_game evaluates to the game value") {
  std::mt19937_64 rng(5);
  for (const Game& g : {chsh_game(), ghz_game(), magic_square_game()}) {
    const BellFunctional f = functional_of_game(g);
    for (int rep = 0; rep < 30; ++rep) {
      const Behavior p = test::random_behavior(g.scenario(), rng);
      CHECK(eval_functional(f, p) == doctest::Approx(game_value(g, p)).epsilon(1e-12));
    }
    CHECK(f.has_affine_to_game);
    CHECK(f.affine_offset == 0.0);
    CHECK(f.affine_scale == 1.0);
  }
}

TEST_CASE("identically-true predicate gives the constant functional") {
  Scenario sc = chsh_game().scenario();
  std::vector<std::pair<std::int64_t, Rational>> pi;
  for (std::int64_t q = 0; q < 4; ++q) pi.emplace_back(q, Rational(1, 4));
  const Game g(sc, pi, std::vector<std::vector<char>>(4, std::vector<char>(4, 1)));
  const BellFunctional f = functional_of_game(g);
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 10; ++rep)
    CHECK(eval_functional(f, test::random_behavior(sc, rng)) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("correlator form of game functionals") {
  const auto cf = correlator_form(functional_of_game(chsh_game()));
  REQUIRE(cf.has_value());
  CHECK(cf->constant == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cf->beta[0] == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(cf->beta[1] == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(cf->beta[2] == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(cf->beta[3] == doctest::Approx(-0.125).epsilon(1e-12));

  // XOR game: beta_q = pi(q) (-1)^f(q) / 2.
  const Game x = xor_game(2, 2, {1, 0, 1, 0});
  const auto cx = correlator_form(functional_of_game(x));
  REQUIRE(cx.has_value());
  CHECK(cx->constant == doctest::Approx(0.5).epsilon(1e-12));
  for (std::int64_t q = 0; q < 4; ++q) {
    const double expect = 0.25 * ((q % 2 == 0) ? -1.0 : 1.0) / 2.0;
    CHECK(cx->beta[q] == doctest::Approx(expect).epsilon(1e-12));
  }

  // A marginal reward has no correlator form.
  BellFunctional marginal;
  marginal.scenario = chsh_game().scenario();
  marginal.alpha.assign(16, 0.0);
  marginal.alpha[0] = marginal.alpha[1] = 1.0;  // rewards a=0 whatever b is
  CHECK_FALSE(correlator_form(marginal).has_value());
}

TEST_CASE("round trip through correlator form") {
  std::mt19937_64 rng(13);
  const BellFunctional s = chsh_functional();
  const auto cf = correlator_form(s);
  REQUIRE(cf.has_value());
  for (int rep = 0; rep < 20; ++rep) {
    // Uniform-marginal behaviors from random correlator tables.
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    CorrelatorTable t{s.scenario, {uni(rng), uni(rng), uni(rng), uni(rng)}};
    const Behavior p = behavior_from_correlators(t);
    double via_beta = cf->constant;
    for (std::int64_t q = 0; q < 4; ++q) via_beta += cf->beta[q] * t.at(q);
    CHECK(eval_functional(s, p) == doctest::Approx(via_beta).epsilon(1e-12));
  }
}

TEST_CASE("affine game relations") {
  // omega(CHSH) = 1/2 + S/8
  const auto chsh_fit = fit_affine_to_game(chsh_functional(), chsh_game());
  REQUIRE(chsh_fit.has_value());
  CHECK(chsh_fit->first == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(chsh_fit->second == doctest::Approx(0.125).epsilon(1e-12));

  // omega(GHZ) = 1/2 + <M>/8, checked on random behaviors.
  const auto ghz_fit = fit_affine_to_game(mermin_functional(), ghz_game());
  REQUIRE(ghz_fit.has_value());
  CHECK(ghz_fit->first == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ghz_fit->second == doctest::Approx(0.125).epsilon(1e-12));
  std::mt19937_64 rng(17);
  const BellFunctional m = mermin_functional();
  for (int rep = 0; rep < 100; ++rep) {
    const Behavior p = test::random_behavior(ghz_game().scenario(), rng);
    CHECK(game_value(ghz_game(), p) ==
          doctest::Approx(0.5 + eval_functional(m, p) / 8.0).epsilon(1e-12));
  }

  // A functional unrelated to the game has no affine relation.
  BellFunctional skew;
  skew.scenario = chsh_game().scenario();
  skew.alpha.assign(16, 0.0);
  skew.alpha[5] = 1.0;
  CHECK_FALSE(fit_affine_to_game(skew, chsh_game()).has_value());
}

TEST_CASE("eval_functional is linear") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const BellFunctional s = chsh_functional();
  for (int rep = 0; rep < 30; ++rep) {
    const Behavior p = test::random_behavior(s.scenario, rng);
    const Behavior q = test::random_behavior(s.scenario, rng);
    const double t = uni(rng);
    CHECK(eval_functional(s, test::mix(p, q, t)) ==
          doctest::Approx(t * eval_functional(s, p) + (1 - t) * eval_functional(s, q))
              .epsilon(1e-12));
  }
}

TEST_CASE("deterministic maximum matches the classical value") {
  for (const Game& g : {chsh_game(), ghz_game(), magic_square_game()}) {
    const double max_det = max_deterministic(functional_of_game(g));
    CHECK(max_det == doctest::Approx(classical_value(g).value.to_double()).epsilon(1e-12));
  }
}

TEST_CASE("CHSH chain: classical 2, quantum 2sqrt2, no-signaling 4") {
  const BellFunctional s = chsh_functional();
  CHECK(max_deterministic(s) == doctest::Approx(2.0));
  CHECK(eval_functional(s, strategy_behavior(chsh_canonical_strategy(), s.scenario)) ==
        doctest::Approx(2 * kSqrt2).epsilon(1e-10));
  // S = 8 (omega - 1/2) maps the LP optimum to the no-signaling bound 4.
  CHECK(8.0 * (ns_value(chsh_game()) - 0.5) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("scenario mismatch raises") {
  CHECK_THROWS_WITH_AS(
      eval_functional(chsh_functional(), Behavior::uniform(ghz_game().scenario())),
      doctest::Contains("mismatch"), std::invalid_argument);
}
