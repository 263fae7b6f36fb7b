#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlg/core.hpp"

namespace nlg {

// Linear functional on behaviors: B(P) = sum alpha(q,a) P(a|q). Carries its
// scenario; evaluating across scenarios is an error, never a broadcast.
struct BellFunctional {
  Scenario scenario;
  std::vector<double> alpha;  // [jq * joint_answers + ja]

  bool has_correlator_form = false;
  std::vector<double> beta;  // per joint question
  double beta_constant = 0.0;

  bool has_affine_to_game = false;
  double affine_offset = 0.0;
  double affine_scale = 0.0;

  double coeff(std::int64_t jq, std::int64_t ja) const {
    return alpha[jq * scenario.joint_answers() + ja];
  }
};

inline double eval_functional(const BellFunctional& f, const Behavior& p) {
  f.scenario.require_same(p.scenario(), "eval_functional");
  double s = 0.0;
  const std::int64_t nq = f.scenario.joint_questions(), na = f.scenario.joint_answers();
  for (std::int64_t q = 0; q < nq; ++q)
    for (std::int64_t a = 0; a < na; ++a) s += f.coeff(q, a) * p.at(q, a);
  return s;
}

inline double eval_functional(const BellFunctional& f, const DeterministicStrategy& s) {
  s.validate(f.scenario);
  const Scenario& sc = f.scenario;
  double total = 0.0;
  const int np = sc.num_parties();
  std::vector<int> answer(np);
  for (std::int64_t q = 0; q < sc.joint_questions(); ++q) {
    const auto qv = sc.unpack_question(q);
    for (int p = 0; p < np; ++p) answer[p] = s.responses[p][qv[p]];
    total += f.coeff(q, sc.pack_answer(answer));
  }
  return total;
}

// Correlator form: B = constant + sum_q beta_q E_q, valid when the
// per-question character decomposition of alpha has no proper-subset
// (marginal) terms.
struct CorrelatorForm {
  std::vector<double> beta;
  double constant = 0.0;
};

inline std::optional<CorrelatorForm> correlator_form(const BellFunctional& f, double tol = 1e-10) {
  const Scenario& sc = f.scenario;
  if (!sc.all_binary_answers()) return std::nullopt;
  const std::int64_t nq = sc.joint_questions(), na = sc.joint_answers();
  const int np = sc.num_parties();
  const double scale = 1.0 / static_cast<double>(na);

  CorrelatorForm out;
  out.beta.assign(nq, 0.0);
  for (std::int64_t q = 0; q < nq; ++q) {
    // c_S(q) for every subset S of parties; only the empty and full subsets
    // may survive.
    for (int subset = 0; subset < (1 << np); ++subset) {
      double c = 0.0;
      for (std::int64_t a = 0; a < na; ++a) {
        const auto av = sc.unpack_answer(a);
        int par = 0;
        for (int p = 0; p < np; ++p)
          if (subset & (1 << p)) par ^= av[p];
        c += (par ? -1.0 : 1.0) * f.coeff(q, a);
      }
      c *= scale;
      if (subset == 0) out.constant += c;
      else if (subset == (1 << np) - 1) out.beta[q] = c;
      else if (std::abs(c) > tol) return std::nullopt;
    }
  }
  return out;
}

// Builds the functional constant + sum_q beta_q E_q on a binary scenario.
inline BellFunctional correlator_functional(const Scenario& sc, const std::vector<double>& beta,
                                            double constant = 0.0) {
  if (!sc.all_binary_answers())
    throw std::invalid_argument("correlator_functional: answer alphabets must be binary");
  if (static_cast<std::int64_t>(beta.size()) != sc.joint_questions())
    throw std::invalid_argument("correlator_functional: beta size mismatch");
  BellFunctional f;
  f.scenario = sc;
  const std::int64_t nq = sc.joint_questions(), na = sc.joint_answers();
  f.alpha.assign(nq * na, 0.0);
  const double cq = constant / static_cast<double>(nq);
  for (std::int64_t q = 0; q < nq; ++q)
    for (std::int64_t a = 0; a < na; ++a) {
      const auto av = sc.unpack_answer(a);
      int par = 0;
      for (int bit : av) par ^= bit;
      f.alpha[q * na + a] = cq + (par ? -1.0 : 1.0) * beta[q];
    }
  f.has_correlator_form = true;
  f.beta = beta;
  f.beta_constant = constant;
  return f;
}

// Exact affine relation omega(G;P) = offset + scale * B(P) over all
// normalized behaviors: requires alpha_game - scale * alpha_f to be constant
// within each question block. Checking the coefficients covers every
// normalized behavior, signaling ones included.
inline std::optional<std::pair<double, double>> fit_affine_to_game(const BellFunctional& f,
                                                                   const Game& g,
                                                                   double tol = 1e-10) {
  f.scenario.require_same(g.scenario(), "fit_affine_to_game");
  const Scenario& sc = f.scenario;
  const std::int64_t nq = sc.joint_questions(), na = sc.joint_answers();

  std::vector<double> game_alpha(nq * na, 0.0);
  for (int i = 0; i < g.promise_size(); ++i) {
    const auto& [jq, w] = g.pi()[i];
    for (std::int64_t a = 0; a < na; ++a)
      if (g.wins(i, a)) game_alpha[jq * na + a] = w.to_double();
  }

  // Least-squares scale from the centered coefficients, question by question.
  double num = 0.0, den = 0.0;
  for (std::int64_t q = 0; q < nq; ++q) {
    double mg = 0.0, mf = 0.0;
    for (std::int64_t a = 0; a < na; ++a) {
      mg += game_alpha[q * na + a];
      mf += f.coeff(q, a);
    }
    mg /= static_cast<double>(na);
    mf /= static_cast<double>(na);
    for (std::int64_t a = 0; a < na; ++a) {
      const double dg = game_alpha[q * na + a] - mg;
      const double df = f.coeff(q, a) - mf;
      num += dg * df;
      den += df * df;
    }
  }
  const double scale = den > tol * tol ? num / den : 0.0;

  double offset = 0.0;
  for (std::int64_t q = 0; q < nq; ++q) {
    double block = 0.0;
    for (std::int64_t a = 0; a < na; ++a)
      block += game_alpha[q * na + a] - scale * f.coeff(q, a);
    offset += block / static_cast<double>(na);
    // Residual must be constant across answers within the block.
    const double mean = block / static_cast<double>(na);
    for (std::int64_t a = 0; a < na; ++a)
      if (std::abs(game_alpha[q * na + a] - scale * f.coeff(q, a) - mean) > tol)
        return std::nullopt;
  }
  return std::make_pair(offset, scale);
}

// alpha(a,q) = pi(q) V(a,q): evaluates to the game value on every behavior.
inline BellFunctional functional_of_game(const Game& g) {
  BellFunctional f;
  f.scenario = g.scenario();
  const std::int64_t na = f.scenario.joint_answers();
  f.alpha.assign(f.scenario.joint_questions() * na, 0.0);
  for (int i = 0; i < g.promise_size(); ++i) {
    const auto& [jq, w] = g.pi()[i];
    for (std::int64_t a = 0; a < na; ++a)
      if (g.wins(i, a)) f.alpha[jq * na + a] = w.to_double();
  }
  if (auto cf = correlator_form(f)) {
    f.has_correlator_form = true;
    f.beta = cf->beta;
    f.beta_constant = cf->constant;
  }
  f.has_affine_to_game = true;
  f.affine_offset = 0.0;
  f.affine_scale = 1.0;
  return f;
}

}  // namespace nlg
