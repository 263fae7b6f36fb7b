#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlg/rational.hpp"

namespace nlg {

enum class AnswerConstraint { None, EvenParity, OddParity };

inline std::string to_string(AnswerConstraint c) {
  switch (c) {
    case AnswerConstraint::EvenParity: return "even_parity";
    case AnswerConstraint::OddParity: return "odd_parity";
    default: return "";
  }
}

// One player's question and answer alphabets. Labels are strings at the
// interface; all loops run over dense indices.
struct PartySpace {
  std::string name;
  std::vector<std::string> questions;
  std::vector<std::string> answers;
  AnswerConstraint constraint = AnswerConstraint::None;
  // Structured answer spaces (declared constraint, or degenerate alphabets
  // such as 1-color coloring games) may have fewer than 2 answers.
  bool structured = false;
};

// Keeps every bit string of the given length whose parity matches.
inline std::vector<std::string> parity_strings(int bits, bool odd) {
  std::vector<std::string> out;
  for (int v = 0; v < (1 << bits); ++v) {
    int par = 0;
    std::string s;
    for (int i = 0; i < bits; ++i) {
      const int b = (v >> (bits - 1 - i)) & 1;
      par ^= b;
      s.push_back(static_cast<char>('0' + b));
    }
    if (par == (odd ? 1 : 0)) out.push_back(s);
  }
  return out;
}

class Scenario {
 public:
  Scenario() = default;
  explicit Scenario(std::vector<PartySpace> parties) : parties_(std::move(parties)) {
    validate();
    index();
  }

  const std::vector<PartySpace>& parties() const { return parties_; }
  int num_parties() const { return static_cast<int>(parties_.size()); }
  int num_questions(int p) const { return static_cast<int>(parties_[p].questions.size()); }
  int num_answers(int p) const { return static_cast<int>(parties_[p].answers.size()); }
  std::int64_t joint_questions() const { return jq_; }
  std::int64_t joint_answers() const { return ja_; }

  // Mixed-radix packing, party 0 most significant.
  std::int64_t pack_question(const std::vector<int>& q) const { return pack(q, true); }
  std::int64_t pack_answer(const std::vector<int>& a) const { return pack(a, false); }
  std::vector<int> unpack_question(std::int64_t jq) const { return unpack(jq, true); }
  std::vector<int> unpack_answer(std::int64_t ja) const { return unpack(ja, false); }

  int question_index(int p, const std::string& label) const {
    return find(parties_[p].questions, label, parties_[p].name, "question");
  }
  int answer_index(int p, const std::string& label) const {
    return find(parties_[p].answers, label, parties_[p].name, "answer");
  }

  bool operator==(const Scenario& o) const {
    if (parties_.size() != o.parties_.size()) return false;
    for (size_t p = 0; p < parties_.size(); ++p) {
      if (parties_[p].questions != o.parties_[p].questions) return false;
      if (parties_[p].answers != o.parties_[p].answers) return false;
    }
    return true;
  }
  bool operator!=(const Scenario& o) const { return !(*this == o); }

  // Raises with the offending party name when two scenarios differ.
  void require_same(const Scenario& o, const std::string& context) const {
    if (parties_.size() != o.parties_.size())
      throw std::invalid_argument(context + ": party count mismatch (" +
                                  std::to_string(parties_.size()) + " vs " +
                                  std::to_string(o.parties_.size()) + ")");
    for (size_t p = 0; p < parties_.size(); ++p) {
      if (parties_[p].questions != o.parties_[p].questions)
        throw std::invalid_argument(context + ": question alphabet mismatch for party " +
                                    parties_[p].name);
      if (parties_[p].answers != o.parties_[p].answers)
        throw std::invalid_argument(context + ": answer alphabet mismatch for party " +
                                    parties_[p].name);
    }
  }

  bool all_binary_answers() const {
    return std::all_of(parties_.begin(), parties_.end(),
                       [](const PartySpace& ps) { return ps.answers.size() == 2; });
  }

 private:
  void validate() const {
    if (parties_.size() < 2)
      throw std::invalid_argument("scenario needs at least 2 parties, got " +
                                  std::to_string(parties_.size()));
    for (const auto& ps : parties_) {
      if (ps.questions.empty())
        throw std::invalid_argument("party " + ps.name + " has no questions");
      if (ps.answers.empty())
        throw std::invalid_argument("party " + ps.name + " has no answers");
      if (ps.answers.size() < 2 && !ps.structured && ps.constraint == AnswerConstraint::None)
        throw std::invalid_argument("party " + ps.name +
                                    " needs at least 2 answers (or a structured answer space)");
      check_unique(ps.questions, ps.name, "question");
      check_unique(ps.answers, ps.name, "answer");
    }
  }

  static void check_unique(const std::vector<std::string>& v, const std::string& party,
                           const char* kind) {
    std::set<std::string> seen(v.begin(), v.end());
    if (seen.size() != v.size())
      throw std::invalid_argument(std::string("duplicate ") + kind + " label for party " + party);
  }

  static int find(const std::vector<std::string>& v, const std::string& label,
                  const std::string& party, const char* kind) {
    const auto it = std::find(v.begin(), v.end(), label);
    if (it == v.end())
      throw std::invalid_argument("unknown " + std::string(kind) + " label '" + label +
                                  "' for party " + party);
    return static_cast<int>(it - v.begin());
  }

  void index() {
    jq_ = 1;
    ja_ = 1;
    for (const auto& ps : parties_) {
      jq_ *= static_cast<std::int64_t>(ps.questions.size());
      ja_ *= static_cast<std::int64_t>(ps.answers.size());
    }
    if (jq_ <= 0) throw std::invalid_argument("joint question count overflow");
  }

  std::int64_t pack(const std::vector<int>& v, bool questions) const {
    if (static_cast<int>(v.size()) != num_parties())
      throw std::invalid_argument("joint index arity mismatch");
    std::int64_t idx = 0;
    for (int p = 0; p < num_parties(); ++p) {
      const int n = questions ? num_questions(p) : num_answers(p);
      if (v[p] < 0 || v[p] >= n) throw std::out_of_range("joint index out of range");
      idx = idx * n + v[p];
    }
    return idx;
  }

  std::vector<int> unpack(std::int64_t idx, bool questions) const {
    std::vector<int> v(num_parties());
    for (int p = num_parties() - 1; p >= 0; --p) {
      const int n = questions ? num_questions(p) : num_answers(p);
      v[p] = static_cast<int>(idx % n);
      idx /= n;
    }
    return v;
  }

  std::vector<PartySpace> parties_;
  std::int64_t jq_ = 0;
  std::int64_t ja_ = 0;
};

// A nonlocal game: scenario, exact-rational question distribution pi over its
// promise set, and winning predicate defined on (promise question, answer).
class Game {
 public:
  Game() = default;
  Game(Scenario scenario, std::vector<std::pair<std::int64_t, Rational>> pi,
       std::vector<std::vector<char>> wins, std::string name = "")
      : scenario_(std::move(scenario)),
        pi_(std::move(pi)),
        wins_(std::move(wins)),
        name_(std::move(name)) {
    validate();
  }

  const Scenario& scenario() const { return scenario_; }
  const std::string& name() const { return name_; }
  // Promise set: joint questions with pi > 0, ascending by packed index.
  const std::vector<std::pair<std::int64_t, Rational>>& pi() const { return pi_; }
  int promise_size() const { return static_cast<int>(pi_.size()); }
  bool wins(int promise_idx, std::int64_t joint_answer) const {
    return wins_[promise_idx][joint_answer] != 0;
  }

 private:
  void validate() const {
    Rational total(0);
    std::int64_t prev = -1;
    for (const auto& [q, w] : pi_) {
      if (q <= prev) throw std::invalid_argument("game pi must be sorted by joint question");
      if (q < 0 || q >= scenario_.joint_questions())
        throw std::invalid_argument("game pi references joint question out of range");
      if (w < Rational(0)) throw std::invalid_argument("game weight negative: " + w.str());
      if (w == Rational(0)) throw std::invalid_argument("game pi stores a zero weight");
      total += w;
      prev = q;
    }
    if (total != Rational(1))
      throw std::invalid_argument("game weights sum to " + total.str() + ", expected 1");
    if (wins_.size() != pi_.size())
      throw std::invalid_argument("predicate table size does not match promise set");
    for (const auto& row : wins_)
      if (static_cast<std::int64_t>(row.size()) != scenario_.joint_answers())
        throw std::invalid_argument("predicate row does not cover every joint answer");
  }

  Scenario scenario_;
  std::vector<std::pair<std::int64_t, Rational>> pi_;
  std::vector<std::vector<char>> wins_;
  std::string name_;
};

// Conditional probability table P(answers | questions) over a scenario.
class Behavior {
 public:
  Behavior() = default;
  Behavior(Scenario scenario, std::vector<double> probs)
      : scenario_(std::move(scenario)), p_(std::move(probs)) {
    if (static_cast<std::int64_t>(p_.size()) != scenario_.joint_questions() * scenario_.joint_answers())
      throw std::invalid_argument("behavior table size mismatch");
    validate();
  }

  static Behavior uniform(const Scenario& s) {
    const double v = 1.0 / static_cast<double>(s.joint_answers());
    return Behavior(s, std::vector<double>(s.joint_questions() * s.joint_answers(), v));
  }

  const Scenario& scenario() const { return scenario_; }
  // Entries clamp to 0 on read; tiny negatives are solver noise.
  double at(std::int64_t jq, std::int64_t ja) const {
    return std::max(0.0, p_[jq * scenario_.joint_answers() + ja]);
  }
  double raw(std::int64_t jq, std::int64_t ja) const {
    return p_[jq * scenario_.joint_answers() + ja];
  }

  void validate() const {
    const std::int64_t nq = scenario_.joint_questions(), na = scenario_.joint_answers();
    for (std::int64_t q = 0; q < nq; ++q) {
      double row = 0.0;
      for (std::int64_t a = 0; a < na; ++a) {
        const double v = p_[q * na + a];
        if (v < -1e-12)
          throw std::invalid_argument("behavior entry below 0 at joint question " +
                                      std::to_string(q) + ": " + std::to_string(v));
        row += v;
      }
      if (std::abs(row - 1.0) > 1e-12)
        throw std::invalid_argument("behavior row for joint question " + std::to_string(q) +
                                    " sums to " + std::to_string(row));
    }
  }

  // Largest deviation of any single-party answer marginal across the other
  // parties' questions. 0 for tensor-product (and deterministic) behaviors.
  double no_signaling_defect() const {
    const int np = scenario_.num_parties();
    double worst = 0.0;
    for (int p = 0; p < np; ++p) {
      const int nqp = scenario_.num_questions(p);
      const int nap = scenario_.num_answers(p);
      for (int xp = 0; xp < nqp; ++xp) {
        for (int ap = 0; ap < nap; ++ap) {
          bool have_ref = false;
          double ref = 0.0;
          for (std::int64_t jq = 0; jq < scenario_.joint_questions(); ++jq) {
            const auto qv = scenario_.unpack_question(jq);
            if (qv[p] != xp) continue;
            double m = 0.0;
            for (std::int64_t ja = 0; ja < scenario_.joint_answers(); ++ja)
              if (scenario_.unpack_answer(ja)[p] == ap) m += at(jq, ja);
            if (!have_ref) { ref = m; have_ref = true; }
            else worst = std::max(worst, std::abs(m - ref));
          }
        }
      }
    }
    return worst;
  }

  bool no_signaling(double tol = 1e-9) const { return no_signaling_defect() <= tol; }

 private:
  Scenario scenario_;
  std::vector<double> p_;
};

// One deterministic response function per party.
struct DeterministicStrategy {
  // responses[p][x] = answer index party p gives to its question x.
  std::vector<std::vector<int>> responses;

  void validate(const Scenario& s) const {
    if (static_cast<int>(responses.size()) != s.num_parties())
      throw std::invalid_argument("deterministic strategy party count mismatch");
    for (int p = 0; p < s.num_parties(); ++p) {
      if (static_cast<int>(responses[p].size()) != s.num_questions(p))
        throw std::invalid_argument("deterministic strategy not total for party " +
                                    s.parties()[p].name);
      for (int a : responses[p])
        if (a < 0 || a >= s.num_answers(p))
          throw std::invalid_argument("deterministic strategy answer out of range for party " +
                                      s.parties()[p].name);
    }
  }
};

// Finite mixture of deterministic strategies: lambda and q(lambda) for a
// finite scenario.
struct LocalModel {
  std::vector<std::pair<Rational, DeterministicStrategy>> components;

  void validate(const Scenario& s) const {
    Rational total(0);
    for (const auto& [w, strat] : components) {
      if (w < Rational(0)) throw std::invalid_argument("local model weight negative");
      strat.validate(s);
      total += w;
    }
    if (total != Rational(1))
      throw std::invalid_argument("local model weights sum to " + total.str());
  }
};

// Full-correlator table E_xy for scenarios where every answer alphabet is
// binary.
struct CorrelatorTable {
  Scenario scenario;
  std::vector<double> e;  // indexed by packed joint question

  double at(std::int64_t jq) const { return e[jq]; }

  void validate() const {
    if (!scenario.all_binary_answers())
      throw std::invalid_argument("correlator table needs binary answer alphabets");
    if (static_cast<std::int64_t>(e.size()) != scenario.joint_questions())
      throw std::invalid_argument("correlator table size mismatch");
    for (double v : e)
      if (std::abs(v) > 1.0 + 1e-12)
        throw std::domain_error("correlator entry out of [-1,1]: " + std::to_string(v));
  }
};

// ---------------------------------------------------------------------------
// Core operations

inline double game_value(const Game& g, const Behavior& p) {
  g.scenario().require_same(p.scenario(), "game_value");
  double total = 0.0;
  for (int i = 0; i < g.promise_size(); ++i) {
    const auto& [jq, w] = g.pi()[i];
    double win = 0.0;
    for (std::int64_t ja = 0; ja < g.scenario().joint_answers(); ++ja)
      if (g.wins(i, ja)) win += p.at(jq, ja);
    total += w.to_double() * win;
  }
  return total;
}

// Exact value of a deterministic strategy: the sum of pi over the promise
// questions it wins.
inline Rational game_value_exact(const Game& g, const DeterministicStrategy& s) {
  s.validate(g.scenario());
  Rational total(0);
  const int np = g.scenario().num_parties();
  std::vector<int> answer(np);
  for (int i = 0; i < g.promise_size(); ++i) {
    const auto& [jq, w] = g.pi()[i];
    const auto qv = g.scenario().unpack_question(jq);
    for (int p = 0; p < np; ++p) answer[p] = s.responses[p][qv[p]];
    if (g.wins(i, g.scenario().pack_answer(answer))) total += w;
  }
  return total;
}

inline Behavior behavior_of_deterministic(const DeterministicStrategy& s, const Scenario& sc) {
  s.validate(sc);
  const std::int64_t nq = sc.joint_questions(), na = sc.joint_answers();
  std::vector<double> p(nq * na, 0.0);
  const int np = sc.num_parties();
  std::vector<int> answer(np);
  for (std::int64_t jq = 0; jq < nq; ++jq) {
    const auto qv = sc.unpack_question(jq);
    for (int q = 0; q < np; ++q) answer[q] = s.responses[q][qv[q]];
    p[jq * na + sc.pack_answer(answer)] = 1.0;
  }
  return Behavior(sc, std::move(p));
}

inline Behavior behavior_of_model(const LocalModel& m, const Scenario& sc) {
  m.validate(sc);
  const std::int64_t nq = sc.joint_questions(), na = sc.joint_answers();
  std::vector<double> p(nq * na, 0.0);
  for (const auto& [w, strat] : m.components) {
    const Behavior b = behavior_of_deterministic(strat, sc);
    const double wd = w.to_double();
    for (std::int64_t q = 0; q < nq; ++q)
      for (std::int64_t a = 0; a < na; ++a) p[q * na + a] += wd * b.at(q, a);
  }
  return Behavior(sc, std::move(p));
}

// E_q = sum_a (-1)^{sum_i a_i} P(a|q); requires all answer alphabets binary.
inline CorrelatorTable correlators(const Behavior& b) {
  const Scenario& sc = b.scenario();
  if (!sc.all_binary_answers())
    throw std::invalid_argument(
        "correlators: unsupported scenario (answer alphabets must be binary)");
  const std::int64_t nq = sc.joint_questions(), na = sc.joint_answers();
  std::vector<double> e(nq, 0.0);
  for (std::int64_t q = 0; q < nq; ++q) {
    double s = 0.0;
    for (std::int64_t a = 0; a < na; ++a) {
      const auto av = sc.unpack_answer(a);
      int parity = 0;
      for (int bit : av) parity ^= bit;
      s += (parity ? -1.0 : 1.0) * b.at(q, a);
    }
    e[q] = s;
  }
  return CorrelatorTable{sc, std::move(e)};
}

// Uniform-marginal reconstruction, two-party case:
// P(a,b|x,y) = (1 + (-1)^{a+b} E_xy) / 4.
inline Behavior behavior_from_correlators(const CorrelatorTable& t) {
  const Scenario& sc = t.scenario;
  if (sc.num_parties() != 2 || !sc.all_binary_answers())
    throw std::invalid_argument(
        "behavior_from_correlators: only two-party binary scenarios supported");
  const std::int64_t nq = sc.joint_questions();
  std::vector<double> p(nq * 4, 0.0);
  for (std::int64_t q = 0; q < nq; ++q) {
    const double e = t.e[q];
    if (std::abs(e) > 1.0 + 1e-12)
      throw std::domain_error("correlator out of range at joint question " + std::to_string(q) +
                              ": " + std::to_string(e));
    for (std::int64_t a = 0; a < 4; ++a) {
      const int parity = ((a >> 1) ^ a) & 1;
      p[q * 4 + a] = 0.25 * (1.0 + (parity ? -1.0 : 1.0) * std::min(1.0, std::max(-1.0, e)));
    }
  }
  return Behavior(sc, std::move(p));
}

}  // namespace nlg
