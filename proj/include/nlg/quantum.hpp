#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlg/core.hpp"
#include "nlg/linalg.hpp"

namespace nlg {

// One ordered family of measurement effects; projective by default, general
// positive effects allowed.
struct Measurement {
  std::vector<int> outcomes;  // answer indices, parallel to effects
  std::vector<la::ComplexMatrix> effects;

  void validate(int dim, int num_answers, bool projective, double tol = 1e-9) const {
    if (outcomes.size() != effects.size())
      throw std::invalid_argument("measurement: outcomes/effects length mismatch");
    std::vector<char> seen(num_answers, 0);
    la::ComplexMatrix sum = la::ComplexMatrix::zero(dim);
    for (size_t k = 0; k < effects.size(); ++k) {
      const auto& e = effects[k];
      if (e.rows() != dim || e.cols() != dim)
        throw std::invalid_argument("measurement effect is " + e.shape() + ", expected dim " +
                                    std::to_string(dim));
      if (outcomes[k] < 0 || outcomes[k] >= num_answers)
        throw std::invalid_argument("measurement outcome index out of range");
      if (seen[outcomes[k]]++)
        throw std::invalid_argument("measurement lists an outcome twice");
      if (!e.is_hermitian(tol)) throw std::invalid_argument("measurement effect not Hermitian");
      const auto eig = la::hermitian_eig(e);
      if (eig.values.front() < -tol)
        throw std::invalid_argument("measurement effect not PSD (min eigenvalue " +
                                    std::to_string(eig.values.front()) + ")");
      sum = sum + e;
    }
    const la::ComplexMatrix defect = sum - la::ComplexMatrix::identity(dim);
    if (defect.max_abs() > tol)
      throw std::invalid_argument("measurement effects do not sum to identity (defect " +
                                  std::to_string(defect.max_abs()) + ")");
    if (projective) {
      for (size_t i = 0; i < effects.size(); ++i) {
        if ((effects[i] * effects[i] - effects[i]).max_abs() > tol)
          throw std::invalid_argument("projective effect fails E^2 = E");
        for (size_t j = i + 1; j < effects.size(); ++j)
          if ((effects[i] * effects[j]).max_abs() > tol)
            throw std::invalid_argument("projective effects fail E_i E_j = 0");
      }
    }
  }
};

struct QuantumStrategy {
  la::StateVector state;
  std::vector<std::vector<Measurement>> measurements;  // [party][question]
  bool projective = true;

  void validate(const Scenario& sc) const {
    state.validate();
    if (static_cast<int>(state.party_dims.size()) != sc.num_parties())
      throw std::invalid_argument("strategy party count does not match scenario");
    if (static_cast<int>(measurements.size()) != sc.num_parties())
      throw std::invalid_argument("strategy measurement table party count mismatch");
    for (int p = 0; p < sc.num_parties(); ++p) {
      if (static_cast<int>(measurements[p].size()) != sc.num_questions(p))
        throw std::invalid_argument("strategy lacks a measurement for every question of party " +
                                    sc.parties()[p].name);
      for (const auto& m : measurements[p])
        m.validate(state.party_dims[p], sc.num_answers(p), projective);
    }
  }
};

// Hermitian with A^2 = I; eigenvalues are +-1.
struct DichotomicObservable {
  la::ComplexMatrix matrix;

  void validate(double tol = 1e-9) const {
    if (!matrix.is_hermitian(tol))
      throw std::invalid_argument("dichotomic observable not Hermitian");
    const la::ComplexMatrix defect = matrix * matrix - la::ComplexMatrix::identity(matrix.rows());
    if (defect.max_abs() > tol)
      throw std::invalid_argument("dichotomic observable fails A^2 = I");
  }
};

namespace pauli {

inline la::ComplexMatrix I() { return la::ComplexMatrix::identity(2); }
inline la::ComplexMatrix X() {
  la::ComplexMatrix m(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}
inline la::ComplexMatrix Y() {
  la::ComplexMatrix m(2, 2);
  m(0, 1) = la::cplx(0, -1);
  m(1, 0) = la::cplx(0, 1);
  return m;
}
inline la::ComplexMatrix Z() {
  la::ComplexMatrix m(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

}  // namespace pauli

// Two-outcome projective measurement of a +-1 observable; outcome 0 is the
// +1 eigenspace.
inline Measurement measurement_of_observable(const la::ComplexMatrix& obs) {
  DichotomicObservable{obs}.validate();
  const int n = obs.rows();
  Measurement m;
  m.outcomes = {0, 1};
  m.effects.push_back(0.5 * (la::ComplexMatrix::identity(n) + obs));
  m.effects.push_back(0.5 * (la::ComplexMatrix::identity(n) - obs));
  return m;
}

namespace detail {

inline const la::ComplexMatrix* effect_for(const Measurement& m, int answer) {
  for (size_t k = 0; k < m.outcomes.size(); ++k)
    if (m.outcomes[k] == answer) return &m.effects[k];
  return nullptr;
}

}  // namespace detail

// Born rule: P(a|q) = <psi| tensor_p E^{q_p}_{a_p} |psi>.
inline Behavior strategy_behavior(const QuantumStrategy& s, const Scenario& sc) {
  s.validate(sc);
  const std::int64_t nq = sc.joint_questions(), na = sc.joint_answers();
  const int np = sc.num_parties();
  std::vector<double> probs(nq * na, 0.0);
  std::vector<la::ComplexMatrix> factors(np, la::ComplexMatrix(1, 1));
  for (std::int64_t q = 0; q < nq; ++q) {
    const auto qv = sc.unpack_question(q);
    for (std::int64_t a = 0; a < na; ++a) {
      const auto av = sc.unpack_answer(a);
      bool zero = false;
      for (int p = 0; p < np; ++p) {
        const la::ComplexMatrix* e = detail::effect_for(s.measurements[p][qv[p]], av[p]);
        if (!e) { zero = true; break; }
        factors[p] = *e;
      }
      if (zero) continue;
      probs[q * na + a] = la::expectation(s.state, la::kron_all(factors)).real();
    }
  }
  return Behavior(sc, std::move(probs));
}

inline double winning_probability(const Game& g, const QuantumStrategy& s) {
  return game_value(g, strategy_behavior(s, g.scenario()));
}

// sum_q pi(q) sum_a V(a,q) tensor_p E; Hermitian PSD, and
// <psi|Op|psi> equals the winning probability.
inline la::ComplexMatrix game_operator(const Game& g, const QuantumStrategy& s) {
  s.validate(g.scenario());
  const Scenario& sc = g.scenario();
  const int np = sc.num_parties();
  int dim = 1;
  for (int d : s.state.party_dims) dim *= d;
  la::ComplexMatrix op = la::ComplexMatrix::zero(dim);
  std::vector<la::ComplexMatrix> factors(np, la::ComplexMatrix(1, 1));
  for (int i = 0; i < g.promise_size(); ++i) {
    const auto& [jq, w] = g.pi()[i];
    const auto qv = sc.unpack_question(jq);
    for (std::int64_t a = 0; a < sc.joint_answers(); ++a) {
      if (!g.wins(i, a)) continue;
      const auto av = sc.unpack_answer(a);
      bool zero = false;
      for (int p = 0; p < np; ++p) {
        const la::ComplexMatrix* e = detail::effect_for(s.measurements[p][qv[p]], av[p]);
        if (!e) { zero = true; break; }
        factors[p] = *e;
      }
      if (zero) continue;
      op = op + w.to_double() * la::kron_all(factors);
    }
  }
  return op;
}

// ---------------------------------------------------------------------------
// Canonical constructions

// Optimal CHSH strategy: singlet-free form on |Phi+> with A0=Z, A1=X,
// B0=(Z+X)/sqrt2, B1=(Z-X)/sqrt2.
inline QuantumStrategy chsh_canonical_strategy() {
  QuantumStrategy s;
  s.state.party_dims = {2, 2};
  const double r = 1.0 / std::sqrt(2.0);
  s.state.amplitudes = {r, 0.0, 0.0, r};
  const double q = 1.0 / std::sqrt(2.0);
  s.measurements = {
      {measurement_of_observable(pauli::Z()), measurement_of_observable(pauli::X())},
      {measurement_of_observable(q * (pauli::Z() + pauli::X())),
       measurement_of_observable(q * (pauli::Z() - pauli::X()))}};
  return s;
}

// GHZ strategy: X for question 0, Y for question 1, on (|000>+|111>)/sqrt2.
inline QuantumStrategy ghz_canonical_strategy() {
  QuantumStrategy s;
  s.state.party_dims = {2, 2, 2};
  s.state.amplitudes.assign(8, 0.0);
  s.state.amplitudes[0] = s.state.amplitudes[7] = 1.0 / std::sqrt(2.0);
  const Measurement mx = measurement_of_observable(pauli::X());
  const Measurement my = measurement_of_observable(pauli::Y());
  s.measurements = {{mx, my}, {mx, my}, {mx, my}};
  return s;
}

// The Mermin-Peres table, third-row signs as (-ZX, -XZ, YY).
inline std::vector<std::vector<la::ComplexMatrix>> magic_square_table() {
  using namespace pauli;
  return {
      {la::kron(Z(), I()), la::kron(I(), Z()), la::kron(Z(), Z())},
      {la::kron(I(), X()), la::kron(X(), I()), la::kron(X(), X())},
      {la::cplx(-1) * la::kron(Z(), X()), la::cplx(-1) * la::kron(X(), Z()),
       la::kron(Y(), Y())}};
}

// Joint row/column measurements from products of commuting spectral
// projectors on |Phi+>^{x2}; Alice holds qubits (1,3), Bob (2,4). The table
// identities are re-verified at construction instead of trusted.
inline QuantumStrategy magic_square_strategy() {
  const auto table = magic_square_table();
  const la::ComplexMatrix id4 = la::ComplexMatrix::identity(4);

  auto comm_defect = [](const la::ComplexMatrix& a, const la::ComplexMatrix& b) {
    return (a * b - b * a).max_abs();
  };
  for (int r = 0; r < 3; ++r) {
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        if (comm_defect(table[r][i], table[r][j]) > 1e-12)
          throw std::logic_error("magic square: row observables do not commute");
        if (comm_defect(table[i][r], table[j][r]) > 1e-12)
          throw std::logic_error("magic square: column observables do not commute");
      }
    if ((table[r][0] * table[r][1] * table[r][2] - id4).max_abs() > 1e-12)
      throw std::logic_error("magic square: row product is not +I");
    if ((table[0][r] * table[1][r] * table[2][r] + id4).max_abs() > 1e-12)
      throw std::logic_error("magic square: column product is not -I");
  }

  QuantumStrategy s;
  s.state.party_dims = {4, 4};
  s.state.amplitudes.assign(16, 0.0);
  for (int i = 0; i < 4; ++i) s.state.amplitudes[i * 4 + i] = 0.5;

  const auto spectral = [&](const la::ComplexMatrix& obs, int sign) {
    return 0.5 * (id4 + la::cplx(sign) * obs);
  };
  // Bits map eigenvalues by 0 <-> +1, 1 <-> -1; the third bit follows from
  // the row (+I) or column (-I) product.
  const auto even_answers = parity_strings(3, false);
  const auto odd_answers = parity_strings(3, true);
  auto answer_index = [](const std::vector<std::string>& labels, const std::string& bits) {
    for (size_t k = 0; k < labels.size(); ++k)
      if (labels[k] == bits) return static_cast<int>(k);
    throw std::logic_error("magic square: answer label lookup failed");
  };

  s.measurements.assign(2, {});
  for (int q = 0; q < 3; ++q) {
    Measurement row_m, col_m;
    for (int m1 = 0; m1 < 2; ++m1)
      for (int m2 = 0; m2 < 2; ++m2) {
        const int s1 = m1 ? -1 : 1, s2 = m2 ? -1 : 1;
        std::string bits;
        bits.push_back(static_cast<char>('0' + m1));
        bits.push_back(static_cast<char>('0' + m2));

        const la::ComplexMatrix row_eff = spectral(table[q][0], s1) * spectral(table[q][1], s2);
        std::string row_bits = bits;
        row_bits.push_back(static_cast<char>('0' + (m1 ^ m2)));  // m3 = m1*m2
        row_m.outcomes.push_back(answer_index(even_answers, row_bits));
        row_m.effects.push_back(row_eff);

        const la::ComplexMatrix col_eff = spectral(table[0][q], s1) * spectral(table[1][q], s2);
        std::string col_bits = bits;
        col_bits.push_back(static_cast<char>('0' + (1 ^ m1 ^ m2)));  // m3 = -m1*m2
        col_m.outcomes.push_back(answer_index(odd_answers, col_bits));
        col_m.effects.push_back(col_eff);
      }
    s.measurements[0].push_back(std::move(row_m));
    s.measurements[1].push_back(std::move(col_m));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Seesaw: alternate the state with the game operator's top eigenvector and
// per-question projective measurement updates. Every step is guarded, so the
// value never decreases.

struct SeesawResult {
  QuantumStrategy strategy;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> value_history;
};

namespace detail {

// Partial game operators in trace pairing: the (party, question) value
// contribution is sum_a Tr(E_a W_a). Built from unit matrices at slot p.
inline std::vector<la::ComplexMatrix> partial_game_operators(const Game& g,
                                                             const QuantumStrategy& s, int party,
                                                             int question) {
  const Scenario& sc = g.scenario();
  const int np = sc.num_parties();
  const int dp = s.state.party_dims[party];
  std::vector<la::ComplexMatrix> w(sc.num_answers(party), la::ComplexMatrix::zero(dp));
  std::vector<la::ComplexMatrix> factors(np, la::ComplexMatrix(1, 1));

  for (int i = 0; i < g.promise_size(); ++i) {
    const auto& [jq, wt] = g.pi()[i];
    const auto qv = sc.unpack_question(jq);
    if (qv[party] != question) continue;
    for (std::int64_t a = 0; a < sc.joint_answers(); ++a) {
      if (!g.wins(i, a)) continue;
      const auto av = sc.unpack_answer(a);
      bool zero = false;
      for (int p = 0; p < np; ++p) {
        if (p == party) continue;
        const la::ComplexMatrix* e = effect_for(s.measurements[p][qv[p]], av[p]);
        if (!e) { zero = true; break; }
        factors[p] = *e;
      }
      if (zero) continue;
      for (int r = 0; r < dp; ++r)
        for (int c = 0; c < dp; ++c) {
          la::ComplexMatrix unit(dp, dp);
          unit(r, c) = 1.0;
          factors[party] = unit;
          w[av[party]](c, r) += wt.to_double() * la::expectation(s.state, la::kron_all(factors));
        }
    }
  }
  return w;
}

// Best projective split of the subspace S for a two-effect contest:
// the positive eigenspace of S (W_a - W_b) S.
inline void pairwise_reassign(Measurement& m, size_t ka, size_t kb,
                              const std::vector<la::ComplexMatrix>& w) {
  const la::ComplexMatrix sub = m.effects[ka] + m.effects[kb];
  const la::ComplexMatrix diff =
      sub * (w[m.outcomes[ka]] - w[m.outcomes[kb]]) * sub;
  if (!diff.is_hermitian(1e-8)) return;
  const auto eig = la::hermitian_eig(diff);
  const int n = diff.rows();
  la::ComplexMatrix pos = la::ComplexMatrix::zero(n);
  for (int k = 0; k < n; ++k) {
    if (eig.values[k] <= 1e-12) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        pos(i, j) += eig.vectors(i, k) * std::conj(eig.vectors(j, k));
  }
  m.effects[ka] = pos;
  m.effects[kb] = sub - pos;
}

}  // namespace detail

inline SeesawResult seesaw_refine(const Game& g, const QuantumStrategy& s0, int iters = 50,
                                  double tol = 1e-10) {
  QuantumStrategy s = s0;
  s.validate(g.scenario());
  SeesawResult out;
  double value = winning_probability(g, s);
  out.value_history.push_back(value);

  for (int it = 0; it < iters; ++it) {
    // State step: top eigenvector of the game operator.
    {
      const auto eig = la::hermitian_eig(game_operator(g, s));
      QuantumStrategy cand = s;
      const int dim = cand.state.total_dim();
      for (int i = 0; i < dim; ++i)
        cand.state.amplitudes[i] = eig.vectors(i, dim - 1);
      const double v = winning_probability(g, cand);
      if (v > value) { s = std::move(cand); value = v; }
    }

    // Measurement steps, one (party, question) at a time.
    for (int p = 0; p < g.scenario().num_parties(); ++p) {
      for (int x = 0; x < g.scenario().num_questions(p); ++x) {
        const auto w = detail::partial_game_operators(g, s, p, x);
        QuantumStrategy cand = s;
        Measurement& m = cand.measurements[p][x];
        for (size_t a = 0; a < m.effects.size(); ++a)
          for (size_t b = a + 1; b < m.effects.size(); ++b)
            detail::pairwise_reassign(m, a, b, w);
        double v;
        try {
          m.validate(s.state.party_dims[p], g.scenario().num_answers(p), true, 1e-7);
          v = winning_probability(g, cand);
        } catch (const std::invalid_argument&) {
          continue;  // numerically degenerate update, keep the old measurement
        }
        if (v > value) { s = std::move(cand); value = v; }
      }
    }

    out.value_history.push_back(value);
    const size_t h = out.value_history.size();
    if (h >= 2 && out.value_history[h - 1] - out.value_history[h - 2] < tol) {
      out.converged = true;
      out.iterations = it + 1;
      break;
    }
    out.iterations = it + 1;
  }
  out.strategy = std::move(s);
  out.value = value;
  return out;
}

// Deterministic random strategy for seesaw starts.
inline QuantumStrategy random_strategy(const Scenario& sc, const std::vector<int>& party_dims,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  QuantumStrategy s;
  s.state.party_dims = party_dims;
  int dim = 1;
  for (int d : party_dims) dim *= d;
  s.state.amplitudes.resize(dim);
  double norm2 = 0.0;
  for (auto& amp : s.state.amplitudes) {
    amp = la::cplx(gauss(rng), gauss(rng));
    norm2 += std::norm(amp);
  }
  for (auto& amp : s.state.amplitudes) amp /= std::sqrt(norm2);

  s.measurements.resize(sc.num_parties());
  for (int p = 0; p < sc.num_parties(); ++p) {
    const int d = party_dims[p];
    const int na = sc.num_answers(p);
    for (int x = 0; x < sc.num_questions(p); ++x) {
      la::ComplexMatrix h(d, d);
      for (int i = 0; i < d; ++i) {
        h(i, i) = gauss(rng);
        for (int j = i + 1; j < d; ++j) {
          h(i, j) = la::cplx(gauss(rng), gauss(rng));
          h(j, i) = std::conj(h(i, j));
        }
      }
      const auto eig = la::hermitian_eig(h);
      Measurement m;
      for (int a = 0; a < na; ++a) {
        m.outcomes.push_back(a);
        m.effects.push_back(la::ComplexMatrix::zero(d));
      }
      for (int k = 0; k < d; ++k) {
        const int a = k % na;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            m.effects[a](i, j) += eig.vectors(i, k) * std::conj(eig.vectors(j, k));
      }
      s.measurements[p].push_back(std::move(m));
    }
  }
  return s;
}

}  // namespace nlg
