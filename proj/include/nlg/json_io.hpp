#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlg/bell.hpp"
#include "nlg/catalog.hpp"
#include "nlg/core.hpp"
#include "nlg/npa.hpp"
#include "nlg/quantum.hpp"

namespace nlg::io {

using json = nlohmann::ordered_json;

inline json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

inline void save_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// GraphSpec: {"vertices":[...], "edges":[["u","v"],...]}

inline GraphSpec graph_from_json(const json& j) {
  GraphSpec g;
  for (const auto& v : j.at("vertices")) g.vertices.push_back(v.get<std::string>());
  if (j.contains("edges"))
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        throw std::invalid_argument("graph edge must be a [u, v] pair");
      g.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
  g.validate();
  return g;
}

inline json graph_to_json(const GraphSpec& g) {
  json j;
  j["vertices"] = g.vertices;
  json edges = json::array();
  for (const auto& [u, v] : g.edges) edges.push_back({u, v});
  j["edges"] = edges;
  return j;
}

// ---------------------------------------------------------------------------
// Scenario block (the "parties" array of a game file)

inline std::vector<PartySpace> parties_from_json(const json& j) {
  std::vector<PartySpace> parties;
  int idx = 0;
  for (const auto& pj : j) {
    PartySpace ps;
    ps.name = pj.contains("name") ? pj.at("name").get<std::string>()
                                  : std::string(1, static_cast<char>('A' + idx));
    for (const auto& q : pj.at("questions")) ps.questions.push_back(q.get<std::string>());
    for (const auto& a : pj.at("answers")) ps.answers.push_back(a.get<std::string>());
    if (pj.contains("answer_constraint") && !pj.at("answer_constraint").is_null()) {
      const std::string c = pj.at("answer_constraint").get<std::string>();
      if (c == "even_parity") ps.constraint = AnswerConstraint::EvenParity;
      else if (c == "odd_parity") ps.constraint = AnswerConstraint::OddParity;
      else throw std::invalid_argument("unknown answer_constraint '" + c + "'");
      ps.structured = true;
      const bool odd = ps.constraint == AnswerConstraint::OddParity;
      std::vector<std::string> kept;
      for (const auto& label : ps.answers) {
        int par = 0;
        bool binary = !label.empty();
        for (char ch : label) {
          if (ch != '0' && ch != '1') { binary = false; break; }
          par ^= (ch - '0');
        }
        if (!binary)
          throw std::invalid_argument("answer_constraint needs bit-string answers, got '" +
                                      label + "'");
        if (par == (odd ? 1 : 0)) kept.push_back(label);
      }
      ps.answers = std::move(kept);
    }
    parties.push_back(std::move(ps));
    ++idx;
  }
  return parties;
}

inline json parties_to_json(const Scenario& sc) {
  json arr = json::array();
  for (const auto& ps : sc.parties()) {
    json pj;
    pj["name"] = ps.name;
    pj["questions"] = ps.questions;
    pj["answers"] = ps.answers;
    pj["answer_constraint"] =
        ps.constraint == AnswerConstraint::None ? json(nullptr) : json(to_string(ps.constraint));
    arr.push_back(pj);
  }
  return arr;
}

// ---------------------------------------------------------------------------
// Game:
// {"parties":[...], "pi":[{"q":[...],"w":"1/4"}],
//  "predicate":{"type":"table","wins":[{"q":[...],"a":[...]}]}
//            | {"type":"xor","f":[...]}
//            | {"type":"builtin","name":...}}

namespace detail {

inline std::vector<int> labels_to_questions(const Scenario& sc, const json& arr) {
  if (static_cast<int>(arr.size()) != sc.num_parties())
    throw std::invalid_argument("question tuple arity does not match party count");
  std::vector<int> v(sc.num_parties());
  for (int p = 0; p < sc.num_parties(); ++p)
    v[p] = sc.question_index(p, arr[p].is_string() ? arr[p].get<std::string>()
                                                   : arr[p].dump());
  return v;
}

inline std::vector<int> labels_to_answers(const Scenario& sc, const json& arr) {
  if (static_cast<int>(arr.size()) != sc.num_parties())
    throw std::invalid_argument("answer tuple arity does not match party count");
  std::vector<int> v(sc.num_parties());
  for (int p = 0; p < sc.num_parties(); ++p)
    v[p] = sc.answer_index(p, arr[p].is_string() ? arr[p].get<std::string>() : arr[p].dump());
  return v;
}

}  // namespace detail

inline Game game_from_json(const json& j) {
  const json& pred = j.at("predicate");
  const std::string type = pred.at("type").get<std::string>();
  if (type == "builtin") {
    const std::string name = pred.at("name").get<std::string>();
    if (name == "coloring") {
      const GraphSpec graph = graph_from_json(pred.at("graph"));
      return coloring_game(graph, pred.at("colors").get<int>());
    }
    return catalog_game(name);
  }

  Scenario sc(parties_from_json(j.at("parties")));
  std::vector<std::pair<std::int64_t, Rational>> pi;
  for (const auto& rec : j.at("pi")) {
    const auto qv = detail::labels_to_questions(sc, rec.at("q"));
    Rational w = rec.at("w").is_string() ? Rational::parse(rec.at("w").get<std::string>())
                                         : Rational(rec.at("w").get<std::int64_t>());
    if (w == Rational(0)) continue;
    if (w < Rational(0))
      throw std::invalid_argument("pi weight " + w.str() + " is negative");
    pi.emplace_back(sc.pack_question(qv), w);
  }
  std::sort(pi.begin(), pi.end());
  for (size_t i = 1; i < pi.size(); ++i)
    if (pi[i].first == pi[i - 1].first)
      throw std::invalid_argument("pi lists a joint question twice");

  std::vector<std::vector<char>> wins(pi.size(),
                                      std::vector<char>(sc.joint_answers(), 0));
  auto promise_slot = [&](std::int64_t jq) {
    for (size_t i = 0; i < pi.size(); ++i)
      if (pi[i].first == jq) return static_cast<int>(i);
    return -1;
  };

  if (type == "table") {
    for (const auto& rec : pred.at("wins")) {
      const std::int64_t jq = sc.pack_question(detail::labels_to_questions(sc, rec.at("q")));
      const int slot = promise_slot(jq);
      if (slot < 0) continue;  // outside the promise set
      wins[slot][sc.pack_answer(detail::labels_to_answers(sc, rec.at("a")))] = 1;
    }
  } else if (type == "xor") {
    if (sc.num_parties() != 2 || !sc.all_binary_answers())
      throw std::invalid_argument("xor predicate needs two parties with binary answers");
    const auto& f = pred.at("f");
    if (static_cast<std::int64_t>(f.size()) != sc.joint_questions())
      throw std::invalid_argument("xor truth table must list every joint question");
    for (size_t i = 0; i < pi.size(); ++i) {
      const int fv = f[pi[i].first].get<int>();
      if (fv != 0 && fv != 1) throw std::invalid_argument("xor truth table entries must be 0/1");
      for (std::int64_t a = 0; a < sc.joint_answers(); ++a) {
        const auto av = sc.unpack_answer(a);
        wins[i][a] = ((av[0] ^ av[1]) == fv) ? 1 : 0;
      }
    }
  } else {
    throw std::invalid_argument("unknown predicate type '" + type + "'");
  }
  return Game(std::move(sc), std::move(pi), std::move(wins),
              j.contains("name") ? j.at("name").get<std::string>() : "custom");
}

inline json game_to_json(const Game& g) {
  const Scenario& sc = g.scenario();
  json j;
  j["name"] = g.name();
  j["parties"] = parties_to_json(sc);
  json pi = json::array();
  json wins = json::array();
  for (int i = 0; i < g.promise_size(); ++i) {
    const auto& [jq, w] = g.pi()[i];
    const auto qv = sc.unpack_question(jq);
    json qlabels = json::array();
    for (int p = 0; p < sc.num_parties(); ++p) qlabels.push_back(sc.parties()[p].questions[qv[p]]);
    pi.push_back({{"q", qlabels}, {"w", w.str()}});
    for (std::int64_t a = 0; a < sc.joint_answers(); ++a) {
      if (!g.wins(i, a)) continue;
      const auto av = sc.unpack_answer(a);
      json alabels = json::array();
      for (int p = 0; p < sc.num_parties(); ++p) alabels.push_back(sc.parties()[p].answers[av[p]]);
      wins.push_back({{"q", qlabels}, {"a", alabels}});
    }
  }
  j["pi"] = pi;
  j["predicate"] = {{"type", "table"}, {"wins", wins}};
  return j;
}

// ---------------------------------------------------------------------------
// Behavior: flat list of {"q":[...],"a":[...],"p":0.25}; entries not listed
// are zero. The scenario comes from the companion game.

inline Behavior behavior_from_json(const json& j, const Scenario& sc) {
  const json& records = j.is_array() ? j : j.at("probs");
  std::vector<double> p(sc.joint_questions() * sc.joint_answers(), 0.0);
  for (const auto& rec : records) {
    const std::int64_t jq = sc.pack_question(detail::labels_to_questions(sc, rec.at("q")));
    const std::int64_t ja = sc.pack_answer(detail::labels_to_answers(sc, rec.at("a")));
    p[jq * sc.joint_answers() + ja] = rec.at("p").get<double>();
  }
  return Behavior(sc, std::move(p));
}

inline json behavior_to_json(const Behavior& b) {
  const Scenario& sc = b.scenario();
  json arr = json::array();
  for (std::int64_t q = 0; q < sc.joint_questions(); ++q) {
    const auto qv = sc.unpack_question(q);
    json qlabels = json::array();
    for (int p = 0; p < sc.num_parties(); ++p) qlabels.push_back(sc.parties()[p].questions[qv[p]]);
    for (std::int64_t a = 0; a < sc.joint_answers(); ++a) {
      if (b.at(q, a) == 0.0) continue;
      const auto av = sc.unpack_answer(a);
      json alabels = json::array();
      for (int p = 0; p < sc.num_parties(); ++p) alabels.push_back(sc.parties()[p].answers[av[p]]);
      arr.push_back({{"q", qlabels}, {"a", alabels}, {"p", b.at(q, a)}});
    }
  }
  return arr;
}

// ---------------------------------------------------------------------------
// Bell functional: {"alpha":[{"q":[...],"a":[...],"c":1.0}], "beta":...}

inline BellFunctional functional_from_json(const json& j, const Scenario& sc) {
  BellFunctional f;
  f.scenario = sc;
  f.alpha.assign(sc.joint_questions() * sc.joint_answers(), 0.0);
  for (const auto& rec : j.at("alpha")) {
    const std::int64_t jq = sc.pack_question(detail::labels_to_questions(sc, rec.at("q")));
    const std::int64_t ja = sc.pack_answer(detail::labels_to_answers(sc, rec.at("a")));
    f.alpha[jq * sc.joint_answers() + ja] = rec.at("c").get<double>();
  }
  if (j.contains("beta")) {
    f.has_correlator_form = true;
    f.beta.assign(sc.joint_questions(), 0.0);
    f.beta_constant = j.at("beta").value("constant", 0.0);
    for (const auto& rec : j.at("beta").at("entries")) {
      const std::int64_t jq = sc.pack_question(detail::labels_to_questions(sc, rec.at("q")));
      f.beta[jq] = rec.at("b").get<double>();
    }
  }
  return f;
}

inline json functional_to_json(const BellFunctional& f) {
  const Scenario& sc = f.scenario;
  json j;
  j["parties"] = parties_to_json(sc);  // makes the file loadable standalone
  json alpha = json::array();
  for (std::int64_t q = 0; q < sc.joint_questions(); ++q) {
    const auto qv = sc.unpack_question(q);
    json qlabels = json::array();
    for (int p = 0; p < sc.num_parties(); ++p) qlabels.push_back(sc.parties()[p].questions[qv[p]]);
    for (std::int64_t a = 0; a < sc.joint_answers(); ++a) {
      if (f.coeff(q, a) == 0.0) continue;
      const auto av = sc.unpack_answer(a);
      json alabels = json::array();
      for (int p = 0; p < sc.num_parties(); ++p) alabels.push_back(sc.parties()[p].answers[av[p]]);
      alpha.push_back({{"q", qlabels}, {"a", alabels}, {"c", f.coeff(q, a)}});
    }
  }
  j["alpha"] = alpha;
  if (f.has_correlator_form) {
    json entries = json::array();
    for (std::int64_t q = 0; q < sc.joint_questions(); ++q) {
      if (f.beta[q] == 0.0) continue;
      const auto qv = sc.unpack_question(q);
      json qlabels = json::array();
      for (int p = 0; p < sc.num_parties(); ++p)
        qlabels.push_back(sc.parties()[p].questions[qv[p]]);
      entries.push_back({{"q", qlabels}, {"b", f.beta[q]}});
    }
    j["beta"] = {{"constant", f.beta_constant}, {"entries", entries}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Quantum strategy: state amplitudes as [re, im] pairs plus per-party,
// per-question measurement matrices.

namespace detail {

inline la::ComplexMatrix matrix_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  if (rows == 0) throw std::invalid_argument("empty matrix in strategy file");
  const int cols = static_cast<int>(j[0].size());
  la::ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols)
      throw std::invalid_argument("ragged matrix in strategy file");
    for (int k = 0; k < cols; ++k)
      m(i, k) = la::cplx(j[i][k][0].get<double>(), j[i][k][1].get<double>());
  }
  return m;
}

inline json matrix_to_json(const la::ComplexMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detail

inline QuantumStrategy strategy_from_json(const json& j, const Scenario& sc) {
  QuantumStrategy s;
  const json& st = j.at("state");
  for (const auto& d : st.at("party_dims")) s.state.party_dims.push_back(d.get<int>());
  for (const auto& amp : st.at("amplitudes"))
    s.state.amplitudes.emplace_back(amp[0].get<double>(), amp[1].get<double>());
  s.projective = j.value("projective", true);
  const json& meas = j.at("measurements");
  if (static_cast<int>(meas.size()) != sc.num_parties())
    throw std::invalid_argument("strategy file party count mismatch");
  s.measurements.resize(sc.num_parties());
  for (int p = 0; p < sc.num_parties(); ++p) {
    for (const auto& mj : meas[p]) {
      Measurement m;
      const auto& outcomes = mj.at("outcomes");
      const auto& effects = mj.at("effects");
      if (outcomes.size() != effects.size())
        throw std::invalid_argument("strategy measurement outcomes/effects mismatch");
      for (size_t k = 0; k < outcomes.size(); ++k) {
        m.outcomes.push_back(sc.answer_index(p, outcomes[k].get<std::string>()));
        m.effects.push_back(detail::matrix_from_json(effects[k]));
      }
      s.measurements[p].push_back(std::move(m));
    }
  }
  s.validate(sc);
  return s;
}

inline json strategy_to_json(const QuantumStrategy& s, const Scenario& sc) {
  json j;
  json amps = json::array();
  for (const auto& a : s.state.amplitudes) amps.push_back({a.real(), a.imag()});
  j["state"] = {{"party_dims", s.state.party_dims}, {"amplitudes", amps}};
  j["projective"] = s.projective;
  json meas = json::array();
  for (int p = 0; p < sc.num_parties(); ++p) {
    json per_party = json::array();
    for (const auto& m : s.measurements[p]) {
      json outcomes = json::array();
      json effects = json::array();
      for (size_t k = 0; k < m.outcomes.size(); ++k) {
        outcomes.push_back(sc.parties()[p].answers[m.outcomes[k]]);
        effects.push_back(detail::matrix_to_json(m.effects[k]));
      }
      per_party.push_back({{"outcomes", outcomes}, {"effects", effects}});
    }
    meas.push_back(per_party);
  }
  j["measurements"] = meas;
  return j;
}

// ---------------------------------------------------------------------------
// NPA problem dump: byte-stable given the same inputs.

inline json moment_problem_to_json(const npa::MomentProblem& p) {
  json j;
  j["basis"] = p.basis == npa::Basis::Projector ? "projector" : "dichotomic";
  j["level"] = p.level;
  j["side"] = p.sdp.side;
  json mono = json::array();
  for (const auto& w : p.index) mono.push_back(npa::to_string(w));
  j["monomials"] = mono;
  json classes = json::array();
  for (size_t k = 0; k < p.sdp.classes.size(); ++k) {
    json cells = json::array();
    for (const auto& c : p.sdp.classes[k]) cells.push_back({c.i, c.j, c.coeff});
    classes.push_back({{"cells", cells}});
  }
  j["classes"] = classes;
  json fixed = json::array();
  for (const auto& [c, v] : p.sdp.fixed) fixed.push_back({c.i, c.j, c.coeff * v});
  j["fixed"] = fixed;
  j["objective"] = {{"constant", p.sdp.objective_constant}, {"coeffs", p.sdp.objective}};
  return j;
}

// FNV-1a over the canonical game serialization; stable across runs.
inline std::string game_hash(const Game& g) {
  const std::string s = game_to_json(g).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace nlg::io
