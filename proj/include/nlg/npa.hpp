#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlg/bell.hpp"
#include "nlg/core.hpp"
#include "nlg/solvers.hpp"

namespace nlg::npa {

enum class Basis { Projector, Dichotomic };

// Projector or observable symbol. Packing keeps word comparisons cheap and
// gives the lexicographic order used for class representatives.
struct Sym {
  int party = 0, question = 0, answer = 0;

  std::uint32_t packed() const {
    return (static_cast<std::uint32_t>(party) << 16) |
           (static_cast<std::uint32_t>(question) << 8) | static_cast<std::uint32_t>(answer);
  }
  static Sym unpack(std::uint32_t v) {
    return {static_cast<int>(v >> 16), static_cast<int>((v >> 8) & 0xff),
            static_cast<int>(v & 0xff)};
  }
};

// Canonical operator word: symbols stable-sorted by party (cross-party
// commutation), reduced within each party by idempotence/orthogonality
// (projectors) or involution (dichotomic observables).
struct Monomial {
  bool zero = false;
  std::vector<std::uint32_t> word;

  bool is_identity() const { return !zero && word.empty(); }
  bool operator==(const Monomial& o) const { return zero == o.zero && word == o.word; }
  bool operator<(const Monomial& o) const {
    if (zero != o.zero) return o.zero;  // zero sorts last
    if (word.size() != o.word.size()) return word.size() < o.word.size();
    return word < o.word;
  }
};

inline Monomial canonicalize(Monomial m, Basis basis) {
  if (m.zero) return Monomial{true, {}};
  if (basis == Basis::Dichotomic) {
    // Observables are identified by (party, question) alone.
    for (std::uint32_t& v : m.word) v &= ~0xffu;
  }
  std::stable_sort(m.word.begin(), m.word.end(), [](std::uint32_t a, std::uint32_t b) {
    return (a >> 16) < (b >> 16);
  });
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i + 1 < m.word.size(); ++i) {
      const Sym a = Sym::unpack(m.word[i]), b = Sym::unpack(m.word[i + 1]);
      if (a.party != b.party) continue;
      if (basis == Basis::Projector) {
        if (a.question == b.question) {
          if (a.answer == b.answer) {
            m.word.erase(m.word.begin() + i + 1);  // M M = M
          } else {
            return Monomial{true, {}};  // M_a M_a' = 0
          }
          changed = true;
          break;
        }
      } else {
        if (a.question == b.question) {
          m.word.erase(m.word.begin() + i, m.word.begin() + i + 2);  // A A = I
          changed = true;
          break;
        }
      }
    }
  }
  return m;
}

inline Monomial adjoint(Monomial m, Basis basis) {
  if (m.zero) return m;
  std::reverse(m.word.begin(), m.word.end());
  return canonicalize(std::move(m), basis);
}

inline Monomial concat(const Monomial& a, const Monomial& b, Basis basis) {
  if (a.zero || b.zero) return Monomial{true, {}};
  Monomial m;
  m.word = a.word;
  m.word.insert(m.word.end(), b.word.begin(), b.word.end());
  return canonicalize(std::move(m), basis);
}

inline std::string to_string(const Monomial& m) {
  if (m.zero) return "0";
  if (m.word.empty()) return "I";
  std::string s;
  for (std::uint32_t v : m.word) {
    const Sym sym = Sym::unpack(v);
    if (!s.empty()) s += ".";
    s += "p" + std::to_string(sym.party) + "q" + std::to_string(sym.question);
    s += "a" + std::to_string(sym.answer);
  }
  return s;
}

// One NPA level as an SDP: monomial index, entry-equality classes, fixed
// cells, and the game objective over classes.
struct MomentProblem {
  Basis basis = Basis::Projector;
  int level = 1;
  bool complex_embedding = false;
  std::vector<Monomial> index;       // moment matrix rows/columns
  std::vector<Monomial> class_reps;  // lexicographically least word per free class
  std::vector<int> re_class_of_rep;  // SDP class index of each representative's real part
  opt::SemidefiniteProgram sdp;      // side = index size (doubled when embedding)
};

namespace detail {

inline std::vector<std::vector<Sym>> generators(const Scenario& sc, Basis basis,
                                                bool eliminate_last_answer) {
  std::vector<std::vector<Sym>> gens(sc.num_parties());
  for (int p = 0; p < sc.num_parties(); ++p) {
    for (int x = 0; x < sc.num_questions(p); ++x) {
      if (basis == Basis::Dichotomic) {
        gens[p].push_back({p, x, 0});
      } else {
        const int last = sc.num_answers(p) - (eliminate_last_answer ? 1 : 0);
        for (int a = 0; a < last; ++a) gens[p].push_back({p, x, a});
      }
    }
  }
  return gens;
}

// All canonical words of length <= level over the generators; for three or
// more parties the cross-party products of one generator per party are added
// regardless of level so every joint-probability moment lands in the matrix.
inline std::vector<Monomial> build_index(const Scenario& sc,
                                         const std::vector<std::vector<Sym>>& gens, int level,
                                         Basis basis) {
  std::map<Monomial, char> seen;
  std::vector<Monomial> frontier{Monomial{}};
  seen[Monomial{}] = 1;
  for (int len = 0; len < level; ++len) {
    std::vector<Monomial> next;
    for (const auto& w : frontier) {
      for (const auto& party_gens : gens) {
        for (const Sym& g : party_gens) {
          Monomial ext = w;
          ext.word.push_back(g.packed());
          ext = canonicalize(std::move(ext), basis);
          if (ext.zero || static_cast<int>(ext.word.size()) > level) continue;
          if (seen.emplace(ext, 1).second) next.push_back(ext);
        }
      }
    }
    frontier = std::move(next);
  }

  if (sc.num_parties() >= 3) {
    const int np = sc.num_parties();
    for (int subset = 1; subset < (1 << np); ++subset) {
      if (__builtin_popcount(static_cast<unsigned>(subset)) < 2) continue;
      std::vector<int> parts;
      for (int p = 0; p < np; ++p)
        if (subset & (1 << p)) parts.push_back(p);
      std::vector<size_t> pick(parts.size(), 0);
      while (true) {
        Monomial w;
        for (size_t t = 0; t < parts.size(); ++t)
          w.word.push_back(gens[parts[t]][pick[t]].packed());
        seen.emplace(canonicalize(std::move(w), basis), 1);
        size_t t = 0;
        for (; t < parts.size(); ++t) {
          if (++pick[t] < gens[parts[t]].size()) break;
          pick[t] = 0;
        }
        if (t == parts.size()) break;
      }
    }
  }

  std::vector<Monomial> index;
  for (const auto& [w, flag] : seen) {
    (void)flag;
    index.push_back(w);
  }
  std::sort(index.begin(), index.end());
  return index;
}

// Linear combination of canonical words representing sum_q pi V P with the
// last answer of every question eliminated through normalization.
inline std::map<Monomial, double> objective_terms(const Game& g, Basis basis) {
  const Scenario& sc = g.scenario();
  std::map<Monomial, double> terms;

  if (basis == Basis::Dichotomic) {
    const auto cf = correlator_form(functional_of_game(g));
    if (!cf)
      throw std::invalid_argument(
          "npa: dichotomic basis needs a correlator-form game (XOR-type predicate)");
    terms[Monomial{}] += cf->constant;
    for (std::int64_t q = 0; q < sc.joint_questions(); ++q) {
      if (cf->beta[q] == 0.0) continue;
      const auto qv = sc.unpack_question(q);
      Monomial w;
      for (int p = 0; p < sc.num_parties(); ++p) w.word.push_back(Sym{p, qv[p], 0}.packed());
      terms[canonicalize(std::move(w), basis)] += cf->beta[q];
    }
    return terms;
  }

  const int np = sc.num_parties();
  for (int i = 0; i < g.promise_size(); ++i) {
    const auto& [jq, wt] = g.pi()[i];
    const auto qv = sc.unpack_question(jq);
    const double w = wt.to_double();
    for (std::int64_t a = 0; a < sc.joint_answers(); ++a) {
      if (!g.wins(i, a)) continue;
      const auto av = sc.unpack_answer(a);
      // Per-party factor: a projector symbol, or (I - sum of kept
      // projectors) for the eliminated last answer.
      std::vector<std::vector<std::pair<double, std::optional<Sym>>>> factors(np);
      for (int p = 0; p < np; ++p) {
        if (av[p] < sc.num_answers(p) - 1) {
          factors[p].push_back({1.0, Sym{p, qv[p], av[p]}});
        } else {
          factors[p].push_back({1.0, std::nullopt});
          for (int aa = 0; aa + 1 < sc.num_answers(p); ++aa)
            factors[p].push_back({-1.0, Sym{p, qv[p], aa}});
        }
      }
      std::vector<size_t> pick(np, 0);
      while (true) {
        double sign = w;
        Monomial word;
        for (int p = 0; p < np; ++p) {
          sign *= factors[p][pick[p]].first;
          if (factors[p][pick[p]].second) word.word.push_back(factors[p][pick[p]].second->packed());
        }
        terms[canonicalize(std::move(word), basis)] += sign;
        int p = 0;
        for (; p < np; ++p) {
          if (++pick[p] < factors[p].size()) break;
          pick[p] = 0;
        }
        if (p == np) break;
      }
    }
  }
  return terms;
}

}  // namespace detail

// Builds the level-k moment problem. With eliminate_last_answer = false the
// full generator set is kept and the normalization sums become explicit
// linear relations (the cross-check formulation).
inline MomentProblem build_problem(const Game& g, int level, Basis basis,
                                   bool complex_embedding = false,
                                   bool eliminate_last_answer = true) {
  if (level < 1) throw std::invalid_argument("npa: level must be >= 1");
  const Scenario& sc = g.scenario();
  if (basis == Basis::Dichotomic && !sc.all_binary_answers())
    throw std::invalid_argument("npa: dichotomic basis requires binary answers");

  MomentProblem prob;
  prob.basis = basis;
  prob.level = level;
  prob.complex_embedding = complex_embedding;
  const auto gens = detail::generators(sc, basis, eliminate_last_answer);
  prob.index = detail::build_index(sc, gens, level, basis);
  const int n = static_cast<int>(prob.index.size());
  prob.sdp.side = complex_embedding ? 2 * n : n;

  // Equality classes keyed by the lexicographically least of (word, adjoint).
  std::map<Monomial, int> class_of;
  auto key_of = [&](const Monomial& w) {
    const Monomial adj = adjoint(w, basis);
    return adj < w ? adj : w;
  };
  auto class_id = [&](const Monomial& key) {
    const auto it = class_of.find(key);
    if (it != class_of.end()) return it->second;
    const int id = static_cast<int>(prob.class_reps.size());
    class_of.emplace(key, id);
    prob.class_reps.push_back(key);
    prob.sdp.classes.emplace_back();
    if (complex_embedding) prob.sdp.classes.emplace_back();  // paired Im class
    return id;
  };

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Monomial w = concat(adjoint(prob.index[i], basis), prob.index[j], basis);
      if (!complex_embedding) {
        if (w.zero) {
          prob.sdp.fixed.push_back({{i, j, 1.0}, 0.0});
        } else if (w.is_identity()) {
          prob.sdp.fixed.push_back({{i, j, 1.0}, 1.0});
        } else {
          prob.sdp.classes[class_id(key_of(w))].push_back({i, j, 1.0});
        }
        continue;
      }
      // Hermitian formulation embedded as [[X, -Y], [Y, X]] with
      // gamma(w) = x + i y, y(adjoint) = -y. Self-adjoint words pin y = 0.
      const int ni = i + n, nj = j + n;
      if (w.zero || w.is_identity()) {
        const double v = w.zero ? 0.0 : 1.0;
        prob.sdp.fixed.push_back({{i, j, 1.0}, v});
        prob.sdp.fixed.push_back({{ni, nj, 1.0}, v});
        prob.sdp.fixed.push_back({{i, nj, 1.0}, 0.0});
        prob.sdp.fixed.push_back({{ni, j, 1.0}, 0.0});
        continue;
      }
      const Monomial key = key_of(w);
      const int re = class_id(key) * 2;
      const int im = re + 1;
      prob.sdp.classes[re].push_back({i, j, 1.0});
      prob.sdp.classes[re].push_back({ni, nj, 1.0});
      if (adjoint(w, basis) == w) {
        prob.sdp.fixed.push_back({{i, nj, 1.0}, 0.0});
        prob.sdp.fixed.push_back({{ni, j, 1.0}, 0.0});
      } else {
        const double sgn = (w == key) ? 1.0 : -1.0;
        prob.sdp.classes[im].push_back({ni, j, sgn});
        prob.sdp.classes[im].push_back({i, nj, -sgn});
      }
    }
  }
  prob.sdp.objective.assign(prob.sdp.classes.size(), 0.0);

  // Game objective over moment classes.
  const auto terms = detail::objective_terms(g, basis);
  for (const auto& [word, coeff] : terms) {
    if (word.is_identity()) {
      prob.sdp.objective_constant += coeff;
      continue;
    }
    if (word.zero) continue;
    const auto it = class_of.find(key_of(word));
    if (it == class_of.end())
      throw std::logic_error("npa: objective moment " + to_string(word) +
                             " is not represented in the level-" + std::to_string(level) +
                             " matrix");
    prob.sdp.objective[complex_embedding ? it->second * 2 : it->second] += coeff;
  }

  // Explicit normalization relations when the last answer is kept:
  // for every cell and question, sum_a gamma(u' M_a v) = gamma(u' v).
  if (!eliminate_last_answer && basis == Basis::Projector) {
    std::map<std::vector<std::pair<int, double>>, char> dedup;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int p = 0; p < sc.num_parties(); ++p)
          for (int x = 0; x < sc.num_questions(p); ++x) {
            std::map<int, double> row;
            double rhs = 0.0;
            bool representable = true;
            auto add = [&](const Monomial& w, double c) {
              if (w.zero) return;
              if (w.is_identity()) { rhs -= c; return; }
              const auto it = class_of.find(key_of(w));
              if (it == class_of.end()) { representable = false; return; }
              row[complex_embedding ? it->second * 2 : it->second] += c;
            };
            const Monomial left = adjoint(prob.index[i], basis);
            for (int a = 0; a < sc.num_answers(p); ++a) {
              Monomial mid{false, {Sym{p, x, a}.packed()}};
              add(concat(concat(left, mid, basis), prob.index[j], basis), 1.0);
            }
            add(concat(left, prob.index[j], basis), -1.0);
            // Only relations among represented moments belong to this level.
            if (!representable) continue;
            std::vector<std::pair<int, double>> srow(row.begin(), row.end());
            std::erase_if(srow, [](const auto& kv) { return kv.second == 0.0; });
            if (srow.empty()) continue;
            if (dedup.emplace(srow, 1).second) {
              prob.sdp.relations.push_back(std::move(srow));
              prob.sdp.relation_rhs.push_back(rhs);
            }
          }
  }

  // Drop classes that never received a cell (imaginary parts of self-adjoint
  // moments in the embedded formulation) and remap indices.
  {
    std::vector<int> remap(prob.sdp.classes.size(), -1);
    std::vector<std::vector<opt::SdpCell>> classes;
    std::vector<double> objective;
    for (size_t k = 0; k < prob.sdp.classes.size(); ++k) {
      if (prob.sdp.classes[k].empty()) continue;
      remap[k] = static_cast<int>(classes.size());
      classes.push_back(std::move(prob.sdp.classes[k]));
      objective.push_back(prob.sdp.objective[k]);
    }
    for (auto& rel : prob.sdp.relations)
      for (auto& [k, v] : rel) {
        (void)v;
        if (remap[k] < 0) throw std::logic_error("npa: relation references an empty class");
        k = remap[k];
      }
    prob.re_class_of_rep.resize(prob.class_reps.size());
    for (size_t k = 0; k < prob.class_reps.size(); ++k)
      prob.re_class_of_rep[k] = remap[complex_embedding ? 2 * k : k];
    prob.sdp.classes = std::move(classes);
    prob.sdp.objective = std::move(objective);
  }
  return prob;
}

struct NpaOptions {
  double tol = 1e-8;
  int max_iters = 100000;
  bool complex_embedding = false;
  bool eliminate_last_answer = true;
};

struct NpaResult {
  double bound = 0.0;      // SDP optimum plus the solver tolerance margin
  double sdp_value = 0.0;  // raw optimum
  bool converged = false;
  opt::SdpResult sdp;
  MomentProblem problem;
};

// Upper bound on the commuting-operator value of the game, hence on the
// entangled value, at the given hierarchy level.
inline NpaResult npa_bound(const Game& g, int level, Basis basis = Basis::Projector,
                           const NpaOptions& opts = {}) {
  NpaResult res;
  res.problem = build_problem(g, level, basis, opts.complex_embedding,
                              opts.eliminate_last_answer);
  opt::SdpOptions sopts;
  sopts.tol = opts.tol;
  sopts.max_iters = opts.max_iters;
  res.sdp = opt::sdp_solve(res.problem.sdp, sopts);
  res.converged = res.sdp.converged;
  res.sdp_value = res.sdp.value;
  res.bound = res.sdp_value + 100.0 * opts.tol;
  return res;
}

}  // namespace nlg::npa
