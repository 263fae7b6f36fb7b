#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nlg/catalog.hpp"
#include "nlg/classical.hpp"
#include "nlg/npa.hpp"
#include "nlg/solvers.hpp"

using namespace nlg;
using opt::LinearProgram;
using opt::LpStatus;

TEST_CASE("lp: basic optimum") {
  LinearProgram lp;
  lp.num_vars = 2;
  lp.objective = {1.0, 0.0};
  lp.rows = {{1.0, 1.0}};
  lp.rhs = {1.0};
  const auto r = opt::lp_solve(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.primal[0] == doctest::Approx(1.0));
  CHECK(std::abs(r.value - r.dual_value) <= 1e-8);
}

TEST_CASE("lp: infeasible with Farkas certificate") {
  LinearProgram lp;  // x = -1, x >= 0
  lp.num_vars = 1;
  lp.objective = {0.0};
  lp.rows = {{1.0}};
  lp.rhs = {-1.0};
  const auto r = opt::lp_solve(lp);
  REQUIRE(r.status == LpStatus::Infeasible);
  REQUIRE(r.farkas.size() == 1);
  // y^T A <= 0 and y^T b > 0.
  CHECK(r.farkas[0] * 1.0 <= 1e-9);
  CHECK(r.farkas[0] * -1.0 > 1e-9);
}

TEST_CASE("lp: unbounded") {
  LinearProgram lp;  // max x, x - y = 0
  lp.num_vars = 2;
  lp.objective = {1.0, 0.0};
  lp.rows = {{1.0, -1.0}};
  lp.rhs = {0.0};
  CHECK(opt::lp_solve(lp).status == LpStatus::Unbounded);
}

TEST_CASE("lp: degenerate and redundant rows") {
  LinearProgram lp;  // duplicated constraint
  lp.num_vars = 2;
  lp.objective = {1.0, 2.0};
  lp.rows = {{1.0, 1.0}, {1.0, 1.0}};
  lp.rhs = {1.0, 1.0};
  const auto r = opt::lp_solve(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.value == doctest::Approx(2.0));
}

TEST_CASE("lp: CHSH no-signaling problem") {
  const auto r = opt::lp_solve(ns_lp(chsh_game()));
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(r.value - r.dual_value) <= 1e-8 * std::max(1.0, std::abs(r.value)));
  // Primal feasibility within tolerance.
  const auto lp = ns_lp(chsh_game());
  for (size_t i = 0; i < lp.rows.size(); ++i) {
    double ax = 0.0;
    for (int j = 0; j < lp.num_vars; ++j) ax += lp.rows[i][j] * r.primal[j];
    CHECK(std::abs(ax - lp.rhs[i]) <= 1e-9);
  }
}

TEST_CASE("psd_project") {
  // Already PSD: unchanged.
  std::vector<double> a = {2.0, 1.0, 1.0, 2.0};
  const auto pa = opt::psd_project(a, 2);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(pa[i] - a[i]) <= 1e-10);

  // diag(1,-1) -> diag(1,0).
  std::vector<double> d = {1.0, 0.0, 0.0, -1.0};
  const auto pd = opt::psd_project(d, 2);
  CHECK(pd[0] == doctest::Approx(1.0));
  CHECK(pd[3] == doctest::Approx(0.0));

  // Random symmetric: equals the direct spectral clip, and is idempotent.
  std::mt19937_64 rng(43);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 8;
    std::vector<double> m(n * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) m[i * n + j] = m[j * n + i] = gauss(rng);
    const auto pm = opt::psd_project(m, n);
    // Direct clip recomputation.
    const auto eig = la::symmetric_eig(m, n);
    std::vector<double> direct(n * n, 0.0);
    for (int k = 0; k < n; ++k) {
      if (eig.values[k] <= 0) continue;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          direct[i * n + j] += eig.values[k] * eig.vec(i, k) * eig.vec(j, k);
    }
    for (int i = 0; i < n * n; ++i) CHECK(std::abs(pm[i] - direct[i]) <= 1e-9);
    const auto pm2 = opt::psd_project(pm, n);
    for (int i = 0; i < n * n; ++i) CHECK(std::abs(pm2[i] - pm[i]) <= 1e-9);
    const auto echeck = la::symmetric_eig(pm, n);
    CHECK(echeck.values.front() >= -1e-9);
  }

  std::vector<double> asym = {1.0, 2.0, 0.0, 1.0};
  CHECK_THROWS_AS(opt::psd_project(asym, 2), std::invalid_argument);
}

TEST_CASE("sdp: rank-one toy problems") {
  // maximize G01, 2x2, diag fixed to 1 -> 1 with the all-ones matrix.
  opt::SemidefiniteProgram p;
  p.side = 2;
  p.fixed = {{{0, 0, 1.0}, 1.0}, {{1, 1, 1.0}, 1.0}};
  p.classes = {{{0, 1, 1.0}, {1, 0, 1.0}}};
  p.objective = {1.0};
  const auto r = opt::sdp_solve(p);
  REQUIRE(r.converged);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.gamma[1] == doctest::Approx(1.0).epsilon(1e-6));

  // Doubling the objective doubles the optimum.
  p.objective = {2.0};
  const auto r2 = opt::sdp_solve(p);
  CHECK(r2.value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("sdp: validation rejects bad cell structure") {
  opt::SemidefiniteProgram p;
  p.side = 2;
  p.fixed = {{{0, 0, 1.0}, 1.0}, {{1, 1, 1.0}, 1.0}};
  p.classes = {{{0, 1, 1.0}}};  // cell (1,0) uncovered
  p.objective = {1.0};
  CHECK_THROWS_WITH_AS(opt::sdp_solve(p), doctest::Contains("partition"), std::invalid_argument);
}

TEST_CASE("sdp: CHSH level-1 moment problem reaches the Tsirelson bound") {
  const auto prob = npa::build_problem(chsh_game(), 1, npa::Basis::Dichotomic);
  const auto r = opt::sdp_solve(prob.sdp);
  REQUIRE(r.converged);
  // Game value bound -> Bell value bound via S = 8 (omega - 1/2).
  CHECK(8.0 * (r.value - 0.5) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-5));
}

TEST_CASE("sdp: residuals decrease on a 50-iteration moving average") {
  for (const Game& g :
       {chsh_game(), ghz_game(), magic_square_game(), coloring_game(GraphSpec::complete(3), 2)}) {
    const auto prob = npa::build_problem(g, 1, npa::Basis::Projector);
    opt::SdpOptions opts;
    opts.record_history = true;
    const auto r = opt::sdp_solve(prob.sdp, opts);
    REQUIRE(r.converged);
    const auto& h = r.residual_history;
    if (h.size() < 120) continue;  // too short for a meaningful average
    auto avg = [&](size_t start, auto get) {
      double s = 0.0;
      for (size_t i = start; i < start + 50; ++i) s += get(h[i]);
      return s / 50.0;
    };
    for (size_t start = 0; start + 100 < h.size(); start += 50) {
      CHECK(avg(start + 50, [](auto& pr) { return pr.first; }) <=
            avg(start, [](auto& pr) { return pr.first; }) * 1.001);
      CHECK(avg(start + 50, [](auto& pr) { return pr.second; }) <=
            avg(start, [](auto& pr) { return pr.second; }) * 1.001);
    }
  }
}

TEST_CASE("sdp: non-convergence is flagged, not fatal") {
  const auto prob = npa::build_problem(magic_square_game(), 1, npa::Basis::Projector);
  opt::SdpOptions opts;
  opts.max_iters = 3;
  const auto r = opt::sdp_solve(prob.sdp, opts);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
}
