#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlg/classical.hpp"
#include "nlg/core.hpp"
#include "nlg/linalg.hpp"
#include "nlg/npa.hpp"
#include "nlg/quantum.hpp"

namespace nlg {

// Undirected simple graph for coloring games.
struct GraphSpec {
  std::vector<std::string> vertices;
  std::vector<std::pair<std::string, std::string>> edges;

  void validate() const {
    if (vertices.empty()) throw std::invalid_argument("graph has no vertices");
    std::set<std::string> vs(vertices.begin(), vertices.end());
    if (vs.size() != vertices.size()) throw std::invalid_argument("graph has duplicate vertices");
    std::set<std::pair<std::string, std::string>> es;
    for (const auto& [u, v] : edges) {
      if (u == v) throw std::invalid_argument("graph has a self-loop at " + u);
      if (!vs.count(u) || !vs.count(v))
        throw std::invalid_argument("graph edge references unknown vertex");
      auto key = u < v ? std::make_pair(u, v) : std::make_pair(v, u);
      if (!es.insert(key).second) throw std::invalid_argument("graph has a duplicate edge");
    }
  }

  int vertex_index(const std::string& label) const {
    const auto it = std::find(vertices.begin(), vertices.end(), label);
    if (it == vertices.end()) throw std::invalid_argument("unknown vertex " + label);
    return static_cast<int>(it - vertices.begin());
  }

  static GraphSpec complete(int n) {
    GraphSpec g;
    for (int i = 0; i < n; ++i) g.vertices.push_back("v" + std::to_string(i));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) g.edges.emplace_back(g.vertices[i], g.vertices[j]);
    return g;
  }

  static GraphSpec path(int n) {
    GraphSpec g;
    for (int i = 0; i < n; ++i) g.vertices.push_back("v" + std::to_string(i));
    for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(g.vertices[i], g.vertices[i + 1]);
    return g;
  }

  static GraphSpec cycle(int n) {
    GraphSpec g = path(n);
    if (n > 2) g.edges.emplace_back(g.vertices[n - 1], g.vertices[0]);
    return g;
  }
};

namespace detail {

inline std::vector<std::string> binary_labels() { return {"0", "1"}; }

inline std::vector<std::string> numbered_labels(int n, int base = 0) {
  std::vector<std::string> v;
  for (int i = 0; i < n; ++i) v.push_back(std::to_string(base + i));
  return v;
}

}  // namespace detail

// Two-party XOR game: win iff a xor b = f(x,y). f is row-major over
// (Alice question, Bob question); pi defaults to uniform.
inline Game xor_game(int nx, int ny, const std::vector<int>& f,
                     const std::vector<Rational>& pi = {}, const std::string& name = "xor") {
  if (nx < 1 || ny < 1 || static_cast<int>(f.size()) != nx * ny)
    throw std::invalid_argument("xor_game: truth table must have nx*ny entries");
  for (int v : f)
    if (v != 0 && v != 1) throw std::invalid_argument("xor_game: truth table entries must be 0/1");
  Scenario sc({{"A", detail::numbered_labels(nx), detail::binary_labels()},
               {"B", detail::numbered_labels(ny), detail::binary_labels()}});
  std::vector<std::pair<std::int64_t, Rational>> weights;
  std::vector<std::vector<char>> wins;
  for (std::int64_t q = 0; q < sc.joint_questions(); ++q) {
    const Rational w = pi.empty() ? Rational(1, nx * ny) : pi[q];
    if (w == Rational(0)) continue;
    weights.emplace_back(q, w);
    std::vector<char> row(4, 0);
    for (std::int64_t a = 0; a < 4; ++a) {
      const int xa = static_cast<int>(a >> 1), xb = static_cast<int>(a & 1);
      row[a] = ((xa ^ xb) == f[q]) ? 1 : 0;
    }
    wins.push_back(std::move(row));
  }
  return Game(std::move(sc), std::move(weights), std::move(wins), name);
}

// CHSH: the XOR game with f(x,y) = x AND y.
inline Game chsh_game() { return xor_game(2, 2, {0, 0, 0, 1}, {}, "chsh"); }

// Three players, promise x1^x2^x3 = 0, win iff a1^a2^a3 = x1|x2|x3.
inline Game ghz_game() {
  Scenario sc({{"A", detail::binary_labels(), detail::binary_labels()},
               {"B", detail::binary_labels(), detail::binary_labels()},
               {"C", detail::binary_labels(), detail::binary_labels()}});
  std::vector<std::pair<std::int64_t, Rational>> weights;
  std::vector<std::vector<char>> wins;
  for (std::int64_t q = 0; q < 8; ++q) {
    const auto qv = sc.unpack_question(q);
    if ((qv[0] ^ qv[1] ^ qv[2]) != 0) continue;
    weights.emplace_back(q, Rational(1, 4));
    std::vector<char> row(8, 0);
    for (std::int64_t a = 0; a < 8; ++a) {
      const auto av = sc.unpack_answer(a);
      const int parity = av[0] ^ av[1] ^ av[2];
      const int target = qv[0] | qv[1] | qv[2];
      // Truth-table reading: even output parity on 000, odd elsewhere.
      const int table_target = (q == 0) ? 0 : 1;
      if (target != table_target)
        throw std::logic_error("ghz_game: predicate readings disagree on the promise set");
      row[a] = (parity == target) ? 1 : 0;
    }
    wins.push_back(std::move(row));
  }
  return Game(std::move(sc), std::move(weights), std::move(wins), "ghz");
}

// Mermin-Peres magic square. Alice answers even-parity rows, Bob odd-parity
// columns; they win iff the intersection bits agree.
inline Game magic_square_game() {
  Scenario sc({{"A", detail::numbered_labels(3, 1), parity_strings(3, false),
                AnswerConstraint::EvenParity, true},
               {"B", detail::numbered_labels(3, 1), parity_strings(3, true),
                AnswerConstraint::OddParity, true}});
  std::vector<std::pair<std::int64_t, Rational>> weights;
  std::vector<std::vector<char>> wins;
  for (std::int64_t q = 0; q < 9; ++q) {
    const auto qv = sc.unpack_question(q);  // qv[0] = row-1, qv[1] = col-1
    weights.emplace_back(q, Rational(1, 9));
    std::vector<char> row(16, 0);
    for (std::int64_t a = 0; a < 16; ++a) {
      const auto av = sc.unpack_answer(a);
      const std::string& alice = sc.parties()[0].answers[av[0]];
      const std::string& bob = sc.parties()[1].answers[av[1]];
      row[a] = (alice[qv[1]] == bob[qv[0]]) ? 1 : 0;
    }
    wins.push_back(std::move(row));
  }
  return Game(std::move(sc), std::move(weights), std::move(wins), "magic_square");
}

// Optional reweighting for coloring games: (u label, v label, weight).
using ColoringPi = std::vector<std::tuple<std::string, std::string, Rational>>;

// Same color on u=v, different colors across an edge. Default pi is uniform
// over self-pairs and ordered edge pairs.
inline Game coloring_game(const GraphSpec& graph, int colors, const ColoringPi& pi = {},
                          const std::string& name = "coloring") {
  graph.validate();
  if (colors < 1) throw std::invalid_argument("coloring_game: need at least one color");
  const int nv = static_cast<int>(graph.vertices.size());
  Scenario sc({{"A", graph.vertices, detail::numbered_labels(colors, 1), AnswerConstraint::None,
                colors == 1},
               {"B", graph.vertices, detail::numbered_labels(colors, 1), AnswerConstraint::None,
                colors == 1}});

  std::vector<Rational> weight(nv * nv, Rational(0));
  if (pi.empty()) {
    const int support = nv + 2 * static_cast<int>(graph.edges.size());
    for (int v = 0; v < nv; ++v) weight[v * nv + v] = Rational(1, support);
    for (const auto& [u, v] : graph.edges) {
      const int iu = graph.vertex_index(u), iv = graph.vertex_index(v);
      weight[iu * nv + iv] = Rational(1, support);
      weight[iv * nv + iu] = Rational(1, support);
    }
  } else {
    for (const auto& [u, v, w] : pi)
      weight[graph.vertex_index(u) * nv + graph.vertex_index(v)] = w;
  }

  std::vector<std::vector<bool>> adj(nv, std::vector<bool>(nv, false));
  for (const auto& [u, v] : graph.edges) {
    const int iu = graph.vertex_index(u), iv = graph.vertex_index(v);
    adj[iu][iv] = adj[iv][iu] = true;
  }

  std::vector<std::pair<std::int64_t, Rational>> weights;
  std::vector<std::vector<char>> wins;
  for (std::int64_t q = 0; q < sc.joint_questions(); ++q) {
    const auto qv = sc.unpack_question(q);
    if (weight[q] == Rational(0)) continue;
    const bool same = qv[0] == qv[1];
    if (!same && !adj[qv[0]][qv[1]])
      throw std::invalid_argument("coloring pi puts weight on a non-adjacent distinct pair (" +
                                  graph.vertices[qv[0]] + "," + graph.vertices[qv[1]] + ")");
    weights.emplace_back(q, weight[q]);
    std::vector<char> row(colors * colors, 0);
    for (std::int64_t a = 0; a < static_cast<std::int64_t>(colors) * colors; ++a) {
      const auto av = sc.unpack_answer(a);
      row[a] = same ? (av[0] == av[1]) : (av[0] != av[1]);
    }
    wins.push_back(std::move(row));
  }
  return Game(std::move(sc), std::move(weights), std::move(wins), name);
}

// The iff criterion for omega_c = 1 at c >= chi needs every self-pair and
// edge to carry weight; report the proviso with the value instead of
// assuming it.
inline bool coloring_proviso_ok(const GraphSpec& graph, const Game& game) {
  const int nv = static_cast<int>(graph.vertices.size());
  std::vector<bool> covered(nv * nv, false);
  for (const auto& [jq, w] : game.pi()) {
    (void)w;
    covered[jq] = true;
  }
  for (int v = 0; v < nv; ++v)
    if (!covered[v * nv + v]) return false;
  for (const auto& [u, v] : graph.edges) {
    const int iu = graph.vertex_index(u), iv = graph.vertex_index(v);
    if (!covered[iu * nv + iv] && !covered[iv * nv + iu]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Chromatic numbers through the coloring game.

struct ChromaticResult {
  int chi = 0;          // smallest c with classical value exactly 1
  int chi_q_upper = 0;  // smallest c whose NPA bound reaches 1 - 1e-6; a
                        // relaxation certificate, not chi_q itself
  int npa_level = 0;
};

inline ChromaticResult chromatic_numbers(const GraphSpec& graph, int c_max, int npa_level = 1,
                                         std::int64_t cap = kDefaultStrategyCap) {
  graph.validate();
  ChromaticResult out;
  out.npa_level = npa_level;
  for (int c = 1; c <= c_max && out.chi == 0; ++c)
    if (classical_value(coloring_game(graph, c), cap).value == Rational(1)) out.chi = c;
  if (npa_level > 0) {
    for (int c = 1; c <= c_max && out.chi_q_upper == 0; ++c) {
      const auto r = npa::npa_bound(coloring_game(graph, c), npa_level);
      if (r.bound >= 1.0 - 1e-6) out.chi_q_upper = c;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hardy's constraint problem. Not a Game: three joint outcomes are pinned to
// probability zero and the paradox event must still occur.

struct HardyConfig {
  la::StateVector state;                               // two qubits
  std::array<std::array<Measurement, 2>, 2> measurements;  // [party][setting]
};

struct HardyCheck {
  std::array<double, 3> constraint_residuals{};  // P(0,0|0,1), P(0,0|1,0), P(1,1|1,1)
  double paradox_probability = 0.0;              // P(0,0|0,0)
};

inline HardyCheck hardy_check(const la::StateVector& state,
                              const std::array<std::array<Measurement, 2>, 2>& meas) {
  state.validate();
  if (state.party_dims != std::vector<int>{2, 2})
    throw std::invalid_argument("hardy_check: state must be two qubits");
  for (const auto& party : meas)
    for (const auto& m : party) m.validate(2, 2, /*projective=*/true);

  auto joint = [&](int a, int b, int x, int y) {
    const la::ComplexMatrix* ea = detail::effect_for(meas[0][x], a);
    const la::ComplexMatrix* eb = detail::effect_for(meas[1][y], b);
    if (!ea || !eb) return 0.0;
    return la::expectation(state, la::kron(*ea, *eb)).real();
  };
  HardyCheck out;
  out.constraint_residuals = {joint(0, 0, 0, 1), joint(0, 0, 1, 0), joint(1, 1, 1, 1)};
  out.paradox_probability = joint(0, 0, 0, 0);
  return out;
}

namespace hardy_detail {

// One-parameter family solving the zero constraints exactly. With
// t = tan(a1), the state is c|00> + s|11> with s = -c t^2, setting-1
// direction at angle a1 and setting-0 at atan(1/t^3) for both parties.
struct FamilyPoint {
  double theta_c = 1.0, theta_s = 0.0, a0 = 0.0, a1 = 0.0;
};

inline FamilyPoint family_point(double t) {
  FamilyPoint f;
  const double t2 = t * t;
  f.theta_c = 1.0 / std::sqrt(1.0 + t2 * t2);
  f.theta_s = -f.theta_c * t2;
  f.a1 = std::atan(t);
  f.a0 = std::atan(1.0 / (t * t * t));
  return f;
}

inline double family_paradox(double t) {
  const double t4 = t * t * t * t;
  const double t6 = t4 * t * t;
  const double d = (1.0 + t4) * (1.0 + t6) * (1.0 + t6);
  return t4 * (t4 - 1.0) * (t4 - 1.0) / d;
}

inline Measurement direction_measurement(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  la::ComplexMatrix e0(2, 2);
  e0(0, 0) = c * c;
  e0(0, 1) = c * s;
  e0(1, 0) = c * s;
  e0(1, 1) = s * s;
  Measurement m;
  m.outcomes = {0, 1};
  m.effects = {e0, la::ComplexMatrix::identity(2) - e0};
  return m;
}

inline HardyConfig config_from_angles(double theta, double a0, double a1, double b0, double b1) {
  HardyConfig cfg;
  cfg.state.party_dims = {2, 2};
  cfg.state.amplitudes = {std::cos(theta), 0.0, 0.0, std::sin(theta)};
  cfg.measurements[0][0] = direction_measurement(a0);
  cfg.measurements[0][1] = direction_measurement(a1);
  cfg.measurements[1][0] = direction_measurement(b0);
  cfg.measurements[1][1] = direction_measurement(b1);
  return cfg;
}

inline HardyConfig config_from_family(double t) {
  const FamilyPoint f = family_point(t);
  return config_from_angles(std::atan2(f.theta_s, f.theta_c), f.a0, f.a1, f.a0, f.a1);
}

}  // namespace hardy_detail

// Two-qubit configuration with the interferometric paradox probability 1/16:
// the zero constraints hold along the one-parameter family, and the family
// parameter is bisected until the paradox probability hits 1/16 (taking the
// root on the less-entangled side of the peak).
inline HardyConfig hardy_interferometric_config() {
  using hardy_detail::family_paradox;
  // Golden-section for the peak location first.
  double lo = 0.05, hi = 0.99;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  for (int it = 0; it < 200; ++it) {
    if (family_paradox(x1) < family_paradox(x2)) {
      lo = x1;
      x1 = x2;
      x2 = lo + gr * (hi - lo);
    } else {
      hi = x2;
      x2 = x1;
      x1 = hi - gr * (hi - lo);
    }
  }
  const double peak = 0.5 * (lo + hi);

  double a = 1e-3, b = peak;  // rising branch
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (family_paradox(mid) < 1.0 / 16.0) a = mid;
    else b = mid;
  }
  return hardy_detail::config_from_family(0.5 * (a + b));
}

struct HardyOptimum {
  double best_probability = 0.0;
  HardyConfig strategy;
  int accepted_restarts = 0;
};

namespace hardy_detail {

struct Angles {
  std::array<double, 5> v{};  // theta, a0, a1, b0, b1
};

// Closed-form joint probabilities of the real-rotation configuration; the
// matrix route in hardy_check gives the same numbers and stays the source
// of truth for accepted candidates.
inline HardyCheck check_of(const Angles& x) {
  const double c = std::cos(x.v[0]), s = std::sin(x.v[0]);
  auto p00 = [&](double a, double b) {
    const double amp = c * std::cos(a) * std::cos(b) + s * std::sin(a) * std::sin(b);
    return amp * amp;
  };
  auto p11 = [&](double a, double b) {
    const double amp = c * std::sin(a) * std::sin(b) + s * std::cos(a) * std::cos(b);
    return amp * amp;
  };
  HardyCheck out;
  out.constraint_residuals = {p00(x.v[1], x.v[4]), p00(x.v[2], x.v[3]), p11(x.v[2], x.v[4])};
  out.paradox_probability = p00(x.v[1], x.v[3]);
  return out;
}

inline double zero_norm2(const HardyCheck& c) {
  double s = 0.0;
  for (double z : c.constraint_residuals) s += z * z;
  return s;
}

// Gauss-Newton projection onto the zero-constraint manifold.
inline bool project_to_manifold(Angles& x) {
  for (int it = 0; it < 60; ++it) {
    const HardyCheck c = check_of(x);
    double norm = 0.0;
    for (double z : c.constraint_residuals) norm = std::max(norm, std::abs(z));
    if (norm < 1e-13) return true;
    const double h = 1e-6;
    double jac[3][5];
    for (int k = 0; k < 5; ++k) {
      Angles xp = x;
      xp.v[k] += h;
      const HardyCheck cp = check_of(xp);
      for (int r = 0; r < 3; ++r)
        jac[r][k] = (cp.constraint_residuals[r] - c.constraint_residuals[r]) / h;
    }
    // Solve (J J^T) lam = z, step = J^T lam.
    double jjt[3][3] = {};
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s)
        for (int k = 0; k < 5; ++k) jjt[r][s] += jac[r][k] * jac[s][k];
    for (int r = 0; r < 3; ++r) jjt[r][r] += 1e-12;
    double z[3] = {c.constraint_residuals[0], c.constraint_residuals[1],
                   c.constraint_residuals[2]};
    // Tiny Gaussian elimination.
    double m[3][4];
    for (int r = 0; r < 3; ++r) {
      for (int s = 0; s < 3; ++s) m[r][s] = jjt[r][s];
      m[r][3] = z[r];
    }
    for (int col = 0; col < 3; ++col) {
      int piv = col;
      for (int r = col + 1; r < 3; ++r)
        if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
      for (int s = 0; s < 4; ++s) std::swap(m[col][s], m[piv][s]);
      if (std::abs(m[col][col]) < 1e-18) return false;
      for (int r = 0; r < 3; ++r) {
        if (r == col) continue;
        const double f = m[r][col] / m[col][col];
        for (int s = col; s < 4; ++s) m[r][s] -= f * m[col][s];
      }
    }
    double lam[3];
    for (int r = 0; r < 3; ++r) lam[r] = m[r][3] / m[r][r];
    for (int k = 0; k < 5; ++k) {
      double step = 0.0;
      for (int r = 0; r < 3; ++r) step += jac[r][k] * lam[r];
      x.v[k] -= step;
    }
  }
  return false;
}

}  // namespace hardy_detail

// Penalty-method search over (Schmidt angle, four measurement angles),
// Gauss-Newton projected onto the exact zero manifold; restarts = 0 returns
// the stored interferometric configuration untouched.
inline HardyOptimum hardy_optimize(std::uint64_t seed, int restarts) {
  using namespace hardy_detail;
  HardyOptimum out;
  out.strategy = hardy_interferometric_config();
  out.best_probability =
      hardy_check(out.strategy.state, out.strategy.measurements).paradox_probability;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.5707963, 1.5707963);
  for (int r = 0; r < restarts; ++r) {
    Angles x;
    for (double& v : x.v) v = uni(rng);
    // Penalty rounds with coordinate descent, escalating the weight.
    for (double weight = 10.0; weight <= 1e8; weight *= 100.0) {
      double step = 0.2;
      while (step > 1e-7) {
        bool improved = false;
        const HardyCheck c0 = check_of(x);
        double f0 = c0.paradox_probability - weight * zero_norm2(c0);
        for (int k = 0; k < 5; ++k) {
          for (const double delta : {step, -step}) {
            Angles xt = x;
            xt.v[k] += delta;
            const HardyCheck ct = check_of(xt);
            const double ft = ct.paradox_probability - weight * zero_norm2(ct);
            if (ft > f0 + 1e-15) {
              x = xt;
              f0 = ft;
              improved = true;
            }
          }
        }
        if (!improved) step *= 0.5;
      }
    }
    if (!project_to_manifold(x)) continue;
    const HardyCheck c = check_of(x);
    double worst = 0.0;
    for (double z : c.constraint_residuals) worst = std::max(worst, std::abs(z));
    if (worst > 1e-9) continue;
    ++out.accepted_restarts;
    if (c.paradox_probability > out.best_probability) {
      out.best_probability = c.paradox_probability;
      out.strategy = config_from_angles(x.v[0], x.v[1], x.v[2], x.v[3], x.v[4]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical lookups used by the CLI.

inline std::vector<std::string> catalog_names() { return {"chsh", "ghz", "magic_square"}; }

inline Game catalog_game(const std::string& name) {
  if (name == "chsh") return chsh_game();
  if (name == "ghz") return ghz_game();
  if (name == "magic_square") return magic_square_game();
  throw std::invalid_argument("unknown catalog game '" + name +
                              "' (coloring games need --graph and --colors)");
}

inline QuantumStrategy catalog_canonical_strategy(const std::string& name) {
  if (name == "chsh") return chsh_canonical_strategy();
  if (name == "ghz") return ghz_canonical_strategy();
  if (name == "magic_square") return magic_square_strategy();
  throw std::invalid_argument("no canonical strategy for game '" + name + "'");
}

}  // namespace nlg
