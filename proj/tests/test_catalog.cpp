#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlg/catalog.hpp"
#include "nlg/classical.hpp"
#include "nlg/quantum.hpp"

using namespace nlg;

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

TEST_CASE("xor game constructors") {
  // f == 0: both answering 0 wins everything.
  CHECK(classical_value(xor_game(2, 2, {0, 0, 0, 0})).value == Rational(1));
  // f = x xor y: a(x) = x, b(y) = y wins everything.
  CHECK(classical_value(xor_game(2, 2, {0, 1, 1, 0})).value == Rational(1));
  // f = x and y is CHSH.
  const Game viaxor = xor_game(2, 2, {0, 0, 0, 1});
  CHECK(classical_value(viaxor).value == Rational(3, 4));
  const Game chsh = chsh_game();
  for (int i = 0; i < chsh.promise_size(); ++i)
    for (std::int64_t a = 0; a < 4; ++a) CHECK(chsh.wins(i, a) == viaxor.wins(i, a));

  CHECK_THROWS_AS(xor_game(2, 2, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(xor_game(2, 2, {0, 1, 2, 0}), std::invalid_argument);
}

TEST_CASE("ghz game structure") {
  const Game g = ghz_game();
  CHECK(g.promise_size() == 4);
  CHECK(g.scenario().num_parties() == 3);
  CHECK(classical_value(g).value == Rational(3, 4));
  CHECK(winning_probability(g, ghz_canonical_strategy()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("magic square game structure") {
  const Game g = magic_square_game();
  CHECK(g.promise_size() == 9);
  CHECK(g.scenario().num_answers(0) == 4);
  CHECK(g.scenario().num_answers(1) == 4);
  CHECK(g.scenario().parties()[0].constraint == AnswerConstraint::EvenParity);
  CHECK(classical_value(g).value == Rational(8, 9));
  CHECK(winning_probability(g, magic_square_strategy()) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("no 0/1 grid has even rows and odd columns") {
  // The parity obstruction, checked over all 512 grids.
  int consistent = 0;
  for (int grid = 0; grid < 512; ++grid) {
    bool ok = true;
    for (int r = 0; r < 3 && ok; ++r) {
      int parity = 0;
      for (int c = 0; c < 3; ++c) parity ^= (grid >> (3 * r + c)) & 1;
      ok = (parity == 0);
    }
    for (int c = 0; c < 3 && ok; ++c) {
      int parity = 0;
      for (int r = 0; r < 3; ++r) parity ^= (grid >> (3 * r + c)) & 1;
      ok = (parity == 1);
    }
    if (ok) ++consistent;
  }
  CHECK(consistent == 0);
  // Equivalent statement: the product of row parities always equals the
  // product of column parities, so +1 rows cannot meet -1 columns.
  for (int grid = 0; grid < 512; ++grid) {
    int all = 0;
    for (int bit = 0; bit < 9; ++bit) all ^= (grid >> bit) & 1;
    int rows = 0, cols = 0;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        rows ^= (grid >> (3 * r + c)) & 1;
        cols ^= (grid >> (3 * r + c)) & 1;
      }
    CHECK(rows == all);
    CHECK(cols == all);
  }
}

TEST_CASE("graph validation") {
  GraphSpec g;
  g.vertices = {"a", "b"};
  g.edges = {{"a", "a"}};
  CHECK_THROWS_WITH_AS(g.validate(), doctest::Contains("self-loop"), std::invalid_argument);
  g.edges = {{"a", "c"}};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.edges = {{"a", "b"}, {"b", "a"}};
  CHECK_THROWS_WITH_AS(g.validate(), doctest::Contains("duplicate"), std::invalid_argument);
}

TEST_CASE("coloring values across the chromatic threshold") {
  const GraphSpec k3 = GraphSpec::complete(3);
  const GraphSpec k4 = GraphSpec::complete(4);
  const GraphSpec p3 = GraphSpec::path(3);
  const GraphSpec c5 = GraphSpec::cycle(5);
  // c >= chi gives exactly 1; c < chi stays strictly below.
  CHECK(classical_value(coloring_game(k3, 3)).value == Rational(1));
  CHECK(classical_value(coloring_game(k3, 2)).value < Rational(1));
  CHECK(classical_value(coloring_game(k4, 4)).value == Rational(1));
  CHECK(classical_value(coloring_game(k4, 3)).value < Rational(1));
  CHECK(classical_value(coloring_game(p3, 2)).value == Rational(1));
  CHECK(classical_value(coloring_game(p3, 1)).value < Rational(1));
  CHECK(classical_value(coloring_game(c5, 3)).value == Rational(1));
  CHECK(classical_value(coloring_game(c5, 2)).value < Rational(1));
}

TEST_CASE("single edge with one color") {
  GraphSpec edge;
  edge.vertices = {"u", "v"};
  edge.edges = {{"u", "v"}};
  // Self-pairs carry 2 of the 4 support slots; edge rounds are lost.
  CHECK(classical_value(coloring_game(edge, 1)).value == Rational(1, 2));
}

TEST_CASE("coloring pi support validation and proviso") {
  const GraphSpec k3 = GraphSpec::complete(3);
  // Weight on a non-adjacent distinct pair is rejected outright.
  GraphSpec p3 = GraphSpec::path(3);
  ColoringPi bad = {{"v0", "v2", Rational(1)}};
  CHECK_THROWS_WITH_AS(coloring_game(p3, 2, bad), doctest::Contains("non-adjacent"),
                       std::invalid_argument);
  // A distribution that misses an edge fails the proviso.
  ColoringPi partial = {{"v0", "v0", Rational(1, 2)},
                        {"v1", "v1", Rational(1, 4)},
                        {"v2", "v2", Rational(1, 8)},
                        {"v0", "v1", Rational(1, 8)}};
  const Game g = coloring_game(k3, 3, partial);
  CHECK_FALSE(coloring_proviso_ok(k3, g));
  CHECK(coloring_proviso_ok(k3, coloring_game(k3, 3)));
}

TEST_CASE("chromatic numbers") {
  const ChromaticResult k3 = chromatic_numbers(GraphSpec::complete(3), 5);
  CHECK(k3.chi == 3);
  CHECK(k3.chi_q_upper >= 1);
  CHECK(k3.chi_q_upper <= k3.chi);

  const ChromaticResult k4 = chromatic_numbers(GraphSpec::complete(4), 5, /*npa_level=*/0);
  CHECK(k4.chi == 4);

  const ChromaticResult p3 = chromatic_numbers(GraphSpec::path(3), 5, /*npa_level=*/0);
  CHECK(p3.chi == 2);
}

TEST_CASE("pseudo-telepathy flags") {
  CHECK(classical_value(magic_square_game()).value < Rational(1));
  CHECK(winning_probability(magic_square_game(), magic_square_strategy()) >= 1.0 - 1e-9);
  CHECK(classical_value(ghz_game()).value < Rational(1));
  CHECK(winning_probability(ghz_game(), ghz_canonical_strategy()) >= 1.0 - 1e-9);
  // CHSH is not pseudo-telepathy: strict inequalities on both sides.
  const double wq = winning_probability(chsh_game(), chsh_canonical_strategy());
  CHECK(classical_value(chsh_game()).value.to_double() < wq);
  CHECK(wq < 1.0);
}

TEST_CASE("hardy interferometric configuration") {
  const HardyConfig cfg = hardy_interferometric_config();
  const HardyCheck chk = hardy_check(cfg.state, cfg.measurements);
  for (double z : chk.constraint_residuals) CHECK(std::abs(z) <= 1e-9);
  CHECK(chk.paradox_probability == doctest::Approx(1.0 / 16).epsilon(1e-9));
}

TEST_CASE("hardy on a product state: no paradox, loose constraints") {
  la::StateVector product;
  product.party_dims = {2, 2};
  product.amplitudes = {1, 0, 0, 0};  // |00>
  const HardyConfig cfg = hardy_interferometric_config();
  const HardyCheck chk = hardy_check(product, cfg.measurements);
  // Direct Born-rule values for |00>: P(a,b|x,y) factorizes into
  // cos^2 factors of the measurement angles.
  auto angle_of = [&](int party, int setting) {
    const auto& e0 = cfg.measurements[party][setting].effects[0];
    return std::atan2(e0(0, 1).real(), e0(0, 0).real());
  };
  const double a0 = angle_of(0, 0), a1 = angle_of(0, 1);
  const double b0 = angle_of(1, 0), b1 = angle_of(1, 1);
  auto p00 = [](double ax, double by) {
    return std::cos(ax) * std::cos(ax) * std::cos(by) * std::cos(by);
  };
  CHECK(chk.paradox_probability == doctest::Approx(p00(a0, b0)).epsilon(1e-12));
  CHECK(chk.constraint_residuals[0] == doctest::Approx(p00(a0, b1)).epsilon(1e-12));
  CHECK(chk.constraint_residuals[1] == doctest::Approx(p00(a1, b0)).epsilon(1e-12));
  // The zero constraints are violated, so the nonzero paradox probability
  // is classically unremarkable.
  double worst = 0.0;
  for (double z : chk.constraint_residuals) worst = std::max(worst, z);
  CHECK(worst > 1e-3);
}

TEST_CASE("hardy vanishes at maximal entanglement") {
  la::StateVector bell;
  bell.party_dims = {2, 2};
  const double r = 1.0 / kSqrt2;
  bell.amplitudes = {r, 0, 0, -r};  // maximally entangled, Schmidt angle -pi/4
  const HardyConfig cfg = hardy_interferometric_config();
  const HardyCheck chk = hardy_check(bell, cfg.measurements);
  double worst = 0.0;
  for (double z : chk.constraint_residuals) worst = std::max(worst, z);
  CHECK(worst > 1e-3);
}

TEST_CASE("hardy family peak matches the known ceiling") {
  // Dense scan over the one-parameter constraint manifold.
  double best = 0.0;
  for (double t = 0.01; t < 1.0; t += 1e-4)
    best = std::max(best, hardy_detail::family_paradox(t));
  const double ceiling = (5.0 * std::sqrt(5.0) - 11.0) / 2.0;
  CHECK(best == doctest::Approx(ceiling).epsilon(1e-6));
  CHECK(best <= ceiling + 1e-9);
}

TEST_CASE("hardy_optimize with no restarts returns the stored configuration") {
  const HardyOptimum r = hardy_optimize(0, 0);
  CHECK(r.best_probability == doctest::Approx(1.0 / 16).epsilon(1e-9));
}

TEST_CASE("hardy_optimize improves over 1/16 and respects the ceiling") {
  const HardyOptimum r = hardy_optimize(7, 4);
  const double ceiling = (5.0 * std::sqrt(5.0) - 11.0) / 2.0;
  CHECK(r.best_probability <= ceiling + 1e-4);
  CHECK(r.best_probability >= 1.0 / 16 - 1e-12);
  const HardyCheck chk = hardy_check(r.strategy.state, r.strategy.measurements);
  for (double z : chk.constraint_residuals) CHECK(std::abs(z) <= 1e-9);
}

TEST_CASE("catalog lookups") {
  CHECK(catalog_game("chsh").name() == "chsh");
  CHECK_THROWS_WITH_AS(catalog_game("parity"), doctest::Contains("unknown"),
                       std::invalid_argument);
  CHECK_NOTHROW(catalog_canonical_strategy("magic_square"));
  CHECK_THROWS_AS(catalog_canonical_strategy("coloring"), std::invalid_argument);
}

TEST_CASE("catalog games have exactly normalized weights") {
  for (const auto& name : catalog_names()) {
    const Game g = catalog_game(name);
    Rational total(0);
    for (const auto& [q, w] : g.pi()) {
      (void)q;
      total += w;
    }
    CHECK(total == Rational(1));
  }
}
