#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlg/bell.hpp"
#include "nlg/core.hpp"
#include "nlg/solvers.hpp"

namespace nlg {

inline constexpr std::int64_t kDefaultStrategyCap = 100000000;  // 10^8

namespace detail {

// Number of deterministic response functions for one party, capped.
inline std::int64_t strategy_count(const Scenario& sc, int party, std::int64_t cap) {
  std::int64_t n = 1;
  for (int x = 0; x < sc.num_questions(party); ++x) {
    n *= sc.num_answers(party);
    if (n > cap) return cap + 1;
  }
  return n;
}

inline std::int64_t total_strategy_count(const Scenario& sc, std::int64_t cap) {
  std::int64_t total = 1;
  for (int p = 0; p < sc.num_parties(); ++p) {
    const std::int64_t c = strategy_count(sc, p, cap);
    if (c > cap || total > cap / c) return cap + 1;
    total *= c;
  }
  return total;
}

// Decodes per-party strategy index into responses; question 0 is the most
// significant digit, so increasing index is lexicographic over responses.
inline void decode_strategy(const Scenario& sc, int party, std::int64_t idx,
                            std::vector<int>& out) {
  const int nq = sc.num_questions(party);
  const int na = sc.num_answers(party);
  out.resize(nq);
  for (int x = nq - 1; x >= 0; --x) {
    out[x] = static_cast<int>(idx % na);
    idx /= na;
  }
}

}  // namespace detail

// Visits every deterministic strategy tuple in lexicographic order
// (party 0 outermost, question 0 most significant per party).
inline void for_each_deterministic(const Scenario& sc, std::int64_t cap,
                                   const std::function<void(const DeterministicStrategy&)>& fn) {
  const std::int64_t total = detail::total_strategy_count(sc, cap);
  if (total > cap)
    throw std::invalid_argument("deterministic strategy count exceeds cap " + std::to_string(cap));
  const int np = sc.num_parties();
  std::vector<std::int64_t> counts(np);
  for (int p = 0; p < np; ++p) counts[p] = detail::strategy_count(sc, p, cap);

  DeterministicStrategy s;
  s.responses.resize(np);
  for (std::int64_t t = 0; t < total; ++t) {
    std::int64_t rem = t;
    for (int p = np - 1; p >= 0; --p) {
      detail::decode_strategy(sc, p, rem % counts[p], s.responses[p]);
      rem /= counts[p];
    }
    fn(s);
  }
}

struct ClassicalResult {
  Rational value;
  DeterministicStrategy witness;
  std::int64_t strategies_searched = 0;
};

// Exact classical value by exhaustive enumeration over deterministic
// strategy tuples; shared randomness cannot beat the best tuple by
// convexity. Witness ties break to the first tuple in lexicographic order.
inline ClassicalResult classical_value(const Game& g, std::int64_t cap = kDefaultStrategyCap) {
  const Scenario& sc = g.scenario();
  const int np = sc.num_parties();

  // Precomputed promise data: per promise question, the per-party question
  // indices; joint answers packed with precomputed strides.
  std::vector<std::int64_t> astride(np);
  {
    std::int64_t s = 1;
    for (int p = np - 1; p >= 0; --p) {
      astride[p] = s;
      s *= sc.num_answers(p);
    }
  }
  std::vector<std::vector<int>> promise_q;
  for (const auto& [jq, w] : g.pi()) {
    (void)w;
    promise_q.push_back(sc.unpack_question(jq));
  }

  ClassicalResult best;
  best.value = Rational(-1);
  for_each_deterministic(sc, cap, [&](const DeterministicStrategy& s) {
    ++best.strategies_searched;
    Rational v(0);
    for (int i = 0; i < g.promise_size(); ++i) {
      std::int64_t ja = 0;
      for (int p = 0; p < np; ++p) ja += astride[p] * s.responses[p][promise_q[i][p]];
      if (g.wins(i, ja)) v += g.pi()[i].second;
    }
    if (v > best.value) {
      best.value = v;
      best.witness = s;
    }
  });
  return best;
}

// ---------------------------------------------------------------------------
// No-signaling value: LP over the full probability table with normalization
// and per-party marginal equalities against reference question 0.

inline opt::LinearProgram ns_lp(const Game& g) {
  const Scenario& sc = g.scenario();
  const std::int64_t nq = sc.joint_questions(), na = sc.joint_answers();
  const int np = sc.num_parties();

  opt::LinearProgram lp;
  lp.num_vars = static_cast<int>(nq * na);
  lp.objective.assign(lp.num_vars, 0.0);
  for (int i = 0; i < g.promise_size(); ++i) {
    const auto& [jq, w] = g.pi()[i];
    for (std::int64_t a = 0; a < na; ++a)
      if (g.wins(i, a)) lp.objective[jq * na + a] = w.to_double();
  }

  for (std::int64_t q = 0; q < nq; ++q) {
    std::vector<double> row(lp.num_vars, 0.0);
    for (std::int64_t a = 0; a < na; ++a) row[q * na + a] = 1.0;
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(1.0);
  }

  // For party p and every joint question whose p-entry differs from the
  // reference, the marginal over the other parties' answers must match the
  // reference question's.
  for (int p = 0; p < np; ++p) {
    for (std::int64_t q = 0; q < nq; ++q) {
      auto qv = sc.unpack_question(q);
      if (qv[p] == 0) continue;
      auto qref = qv;
      qref[p] = 0;
      const std::int64_t qr = sc.pack_question(qref);
      for (std::int64_t rest = 0; rest < na / sc.num_answers(p); ++rest) {
        std::vector<double> row(lp.num_vars, 0.0);
        // Enumerate joint answers agreeing with `rest` on parties != p.
        for (std::int64_t a = 0; a < na; ++a) {
          const auto av = sc.unpack_answer(a);
          std::int64_t key = 0;
          for (int pp = 0; pp < np; ++pp)
            if (pp != p) key = key * sc.num_answers(pp) + av[pp];
          if (key != rest) continue;
          row[q * na + a] += 1.0;
          row[qr * na + a] -= 1.0;
        }
        lp.rows.push_back(std::move(row));
        lp.rhs.push_back(0.0);
      }
    }
  }
  return lp;
}

struct NsResult {
  double value = 0.0;
  opt::LpResult lp;
};

inline NsResult ns_value_detailed(const Game& g) {
  const opt::LpResult r = opt::lp_solve(ns_lp(g));
  if (r.status != opt::LpStatus::Optimal)
    throw std::runtime_error(
        "ns_value: LP solver returned " +
        std::string(r.status == opt::LpStatus::Infeasible ? "infeasible" : "unbounded") +
        " on a problem that is feasible and bounded by construction");
  return {r.value, r};
}

inline double ns_value(const Game& g) { return ns_value_detailed(g).value; }

// ---------------------------------------------------------------------------
// Local polytope membership with separating-functional extraction.

struct MembershipResult {
  bool in_local = false;
  LocalModel model;            // set when in_local
  BellFunctional functional;   // set when separated
  double local_bound = 0.0;
  double behavior_value = 0.0;
};

inline MembershipResult local_membership(const Behavior& behavior, const Scenario& scenario,
                                         std::int64_t cap = kDefaultStrategyCap) {
  scenario.require_same(behavior.scenario(), "local_membership");
  const std::int64_t nq = scenario.joint_questions(), na = scenario.joint_answers();
  const int np = scenario.num_parties();

  std::vector<DeterministicStrategy> vertices;
  for_each_deterministic(scenario, cap,
                         [&](const DeterministicStrategy& s) { vertices.push_back(s); });

  // Primal: find a convex combination of deterministic behaviors matching
  // the queried behavior entrywise.
  opt::LinearProgram lp;
  lp.num_vars = static_cast<int>(vertices.size());
  lp.objective.assign(lp.num_vars, 0.0);
  const int cells = static_cast<int>(nq * na);
  lp.rows.assign(cells + 1, std::vector<double>(lp.num_vars, 0.0));
  lp.rhs.assign(cells + 1, 0.0);

  std::vector<int> answer(np);
  for (int v = 0; v < lp.num_vars; ++v) {
    for (std::int64_t q = 0; q < nq; ++q) {
      const auto qv = scenario.unpack_question(q);
      for (int p = 0; p < np; ++p) answer[p] = vertices[v].responses[p][qv[p]];
      lp.rows[q * na + scenario.pack_answer(answer)][v] = 1.0;
    }
    lp.rows[cells][v] = 1.0;
  }
  for (std::int64_t q = 0; q < nq; ++q)
    for (std::int64_t a = 0; a < na; ++a) lp.rhs[q * na + a] = behavior.at(q, a);
  lp.rhs[cells] = 1.0;

  const opt::LpResult r = opt::lp_solve(lp);
  MembershipResult out;

  if (r.status == opt::LpStatus::Optimal) {
    out.in_local = true;
    // Rationalize the weights on a fixed dyadic grid and absorb the rounding
    // slack into the largest component so they sum to exactly 1.
    const std::int64_t den = std::int64_t(1) << 40;
    std::vector<std::pair<std::int64_t, int>> picked;
    std::int64_t sum = 0;
    for (int v = 0; v < lp.num_vars; ++v) {
      if (r.primal[v] <= 1e-12) continue;
      const std::int64_t num = std::llround(r.primal[v] * static_cast<double>(den));
      if (num <= 0) continue;
      picked.emplace_back(num, v);
      sum += num;
    }
    if (picked.empty()) picked.emplace_back(0, 0);
    std::int64_t imax = 0;
    for (size_t i = 1; i < picked.size(); ++i)
      if (picked[i].first > picked[imax].first) imax = static_cast<std::int64_t>(i);
    picked[imax].first += den - sum;
    for (const auto& [num, v] : picked)
      if (num > 0) out.model.components.emplace_back(Rational(num, den), vertices[v]);
    out.model.validate(scenario);
    return out;
  }
  if (r.status == opt::LpStatus::Unbounded)
    throw std::runtime_error("local_membership: feasibility LP reported unbounded");

  // Farkas certificate from the terminal basis: y with y^T rows <= 0 on
  // every vertex column and y^T rhs > 0. The cell block of y is a
  // separating functional.
  BellFunctional f;
  f.scenario = scenario;
  f.alpha.assign(cells, 0.0);
  for (int c = 0; c < cells; ++c) f.alpha[c] = r.farkas[c];

  // Canonicalize: remove the affine offset (midpoint of the deterministic
  // range, spread uniformly over question blocks) and scale the
  // deterministic maximum to 2. A CHSH-facet certificate lands exactly on
  // the textbook normalization.
  double dmax = -1e300, dmin = 1e300;
  for (const auto& v : vertices) {
    const double s = eval_functional(f, v);
    dmax = std::max(dmax, s);
    dmin = std::min(dmin, s);
  }
  const double mid = 0.5 * (dmax + dmin);
  const double shift = mid / static_cast<double>(nq);
  for (std::int64_t q = 0; q < nq; ++q)
    for (std::int64_t a = 0; a < na; ++a) f.alpha[q * na + a] -= shift;
  if (dmax - mid > 1e-9) {
    const double scale = 2.0 / (dmax - mid);
    for (double& c : f.alpha) c *= scale;
  }

  out.in_local = false;
  out.functional = f;
  out.local_bound = -1e300;
  for (const auto& v : vertices)
    out.local_bound = std::max(out.local_bound, eval_functional(f, v));
  out.behavior_value = eval_functional(f, behavior);
  if (out.behavior_value <= out.local_bound + 1e-9)
    throw std::runtime_error("local_membership: separation certificate failed numerically");
  return out;
}

}  // namespace nlg
