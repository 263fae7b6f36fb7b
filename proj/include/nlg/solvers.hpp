#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlg/linalg.hpp"

namespace nlg::opt {

// maximize c^T x  subject to  A x = b, x >= 0.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;

  void validate() const {
    if (static_cast<int>(objective.size()) != num_vars)
      throw std::invalid_argument("lp: objective length mismatch");
    if (rows.size() != rhs.size()) throw std::invalid_argument("lp: rhs length mismatch");
    for (const auto& r : rows)
      if (static_cast<int>(r.size()) != num_vars)
        throw std::invalid_argument("lp: row length mismatch");
    for (double v : rhs)
      if (!std::isfinite(v)) throw std::invalid_argument("lp: rhs not finite");
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  std::vector<double> primal;
  std::vector<double> dual;    // per original row; dual of max{c x | Ax=b, x>=0}
  double dual_value = 0.0;     // y^T b, equals value at optimum
  // For infeasible problems: y with y^T A <= 0 componentwise and y^T b > 0.
  std::vector<double> farkas;
};

namespace detail {

constexpr double kLpTol = 1e-9;

// Full-tableau simplex core with Bland's rule. Columns [0, n) are the
// problem variables, [n, n+m) the artificials; artificials may never
// re-enter once phase 1 ends.
class SimplexTableau {
 public:
  SimplexTableau(const LinearProgram& lp) : n_(lp.num_vars), m_(static_cast<int>(lp.rows.size())) {
    row_sign_.assign(m_, 1.0);
    t_.assign(m_ + 1, std::vector<double>(n_ + m_ + 1, 0.0));
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      const double s = lp.rhs[i] < 0.0 ? -1.0 : 1.0;
      row_sign_[i] = s;
      for (int j = 0; j < n_; ++j) t_[i + 1][j] = s * lp.rows[i][j];
      t_[i + 1][n_ + i] = 1.0;
      t_[i + 1][n_ + m_] = s * lp.rhs[i];
      basis_[i] = n_ + i;
    }
  }

  // Phase 1: maximize -(sum of artificials). Returns true when feasible.
  bool phase1() {
    std::vector<double> cost(n_ + m_, 0.0);
    for (int i = 0; i < m_; ++i) cost[n_ + i] = -1.0;
    set_objective(cost);
    run(/*allow_artificial=*/true);
    if (objective_value() < -1e-7) return false;
    // Pivot still-basic artificials out where possible; rows that cannot be
    // pivoted are redundant equalities.
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      int enter = -1;
      for (int j = 0; j < n_; ++j)
        if (std::abs(t_[i + 1][j]) > kLpTol) { enter = j; break; }
      if (enter >= 0) pivot(i, enter);
    }
    return true;
  }

  LpStatus phase2(const std::vector<double>& c) {
    std::vector<double> cost(n_ + m_, 0.0);
    for (int j = 0; j < n_; ++j) cost[j] = c[j];
    set_objective(cost);
    return run(/*allow_artificial=*/false);
  }

  // Row 0 keeps reduced costs c_j - z_j and -objective in the value cell, so
  // one uniform row operation serves every row during a pivot.
  double objective_value() const { return -t_[0][n_ + m_]; }

  std::vector<double> primal() const {
    std::vector<double> x(n_, 0.0);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = t_[i + 1][n_ + m_];
    return x;
  }

  // y_i = -(reduced cost of artificial i), undoing row sign flips.
  std::vector<double> duals() const {
    std::vector<double> y(m_, 0.0);
    for (int i = 0; i < m_; ++i) y[i] = -t_[0][n_ + i] * row_sign_[i];
    return y;
  }

  // After a failed phase 1 the duals certify infeasibility:
  // y^T A >= 0, y^T b < 0 for the phase-1 max problem, so -y is the
  // conventional certificate.
  std::vector<double> farkas() const {
    std::vector<double> y(m_, 0.0);
    for (int i = 0; i < m_; ++i) y[i] = (1.0 + t_[0][n_ + i]) * row_sign_[i];
    return y;
  }

 private:
  void set_objective(const std::vector<double>& cost) {
    for (int j = 0; j <= n_ + m_; ++j) t_[0][j] = 0.0;
    for (int j = 0; j < n_ + m_; ++j) t_[0][j] = cost[j];
    // Price out the current basis; the value cell lands at -objective.
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j <= n_ + m_; ++j) t_[0][j] -= cb * t_[i + 1][j];
    }
  }

  LpStatus run(bool allow_artificial) {
    const int limit = 50000 + 200 * (n_ + m_);
    for (int iter = 0; iter < limit; ++iter) {
      // Bland: smallest-index column with positive reduced cost.
      int enter = -1;
      const int jmax = allow_artificial ? n_ + m_ : n_;
      for (int j = 0; j < jmax; ++j)
        if (t_[0][j] > kLpTol) { enter = j; break; }
      if (enter < 0) return LpStatus::Optimal;

      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = t_[i + 1][enter];
        if (a <= kLpTol) continue;
        const double ratio = t_[i + 1][n_ + m_] / a;
        if (leave < 0 || ratio < best - kLpTol ||
            (ratio < best + kLpTol && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex: iteration limit exceeded");
  }

  void pivot(int row, int col) {
    auto& pr = t_[row + 1];
    const double p = pr[col];
    for (double& v : pr) v /= p;
    for (int i = 0; i <= m_; ++i) {
      if (i == row + 1) continue;
      const double f = t_[i][col];
      if (f == 0.0) continue;
      for (int j = 0; j <= n_ + m_; ++j) t_[i][j] -= f * pr[j];
    }
    basis_[row] = col;
  }

  int n_, m_;
  std::vector<double> row_sign_;
  std::vector<std::vector<double>> t_;
  std::vector<int> basis_;
};

}  // namespace detail

inline LpResult lp_solve(const LinearProgram& lp) {
  lp.validate();
  detail::SimplexTableau tab(lp);
  LpResult res;
  if (!tab.phase1()) {
    res.status = LpStatus::Infeasible;
    res.farkas = tab.farkas();
    return res;
  }
  res.status = tab.phase2(lp.objective);
  if (res.status == LpStatus::Unbounded) return res;
  res.value = tab.objective_value();
  res.primal = tab.primal();
  res.dual = tab.duals();
  res.dual_value = 0.0;
  for (size_t i = 0; i < res.dual.size(); ++i) res.dual_value += res.dual[i] * lp.rhs[i];
  return res;
}

// ---------------------------------------------------------------------------
// Semidefinite programming via ADMM operator splitting: alternate the PSD
// eigenvalue clip with projection onto the affine structure (equality-class
// cells, fixed cells, optional linear relations among class variables).

struct SdpCell {
  int i = 0, j = 0;
  double coeff = 1.0;
};

struct SemidefiniteProgram {
  int side = 0;
  std::vector<std::vector<SdpCell>> classes;     // entry (i,j) = coeff * x_class
  std::vector<std::pair<SdpCell, double>> fixed; // entry (i,j) = coeff * value
  std::vector<double> objective;                 // maximize sum_k obj_k x_k
  double objective_constant = 0.0;
  std::vector<std::vector<std::pair<int, double>>> relations;  // R x = rhs
  std::vector<double> relation_rhs;

  void validate() const {
    if (side <= 0) throw std::invalid_argument("sdp: side must be positive");
    if (side > 512) throw std::invalid_argument("sdp: side exceeds cap 512");
    std::vector<char> covered(static_cast<size_t>(side) * side, 0);
    auto mark = [&](const SdpCell& c) {
      if (c.i < 0 || c.i >= side || c.j < 0 || c.j >= side)
        throw std::invalid_argument("sdp: cell out of range");
      auto& flag = covered[static_cast<size_t>(c.i) * side + c.j];
      if (flag) throw std::invalid_argument("sdp: cell sets do not partition the grid (overlap)");
      flag = 1;
    };
    for (const auto& cells : classes) {
      if (cells.empty()) throw std::invalid_argument("sdp: empty class");
      for (const auto& c : cells) mark(c);
    }
    for (const auto& [c, v] : fixed) {
      (void)v;
      mark(c);
    }
    for (const auto& flag : covered)
      if (!flag) throw std::invalid_argument("sdp: cell sets do not partition the grid (gap)");
    if (objective.size() != classes.size())
      throw std::invalid_argument("sdp: objective length != class count");
    if (relations.size() != relation_rhs.size())
      throw std::invalid_argument("sdp: relation rhs mismatch");
  }
};

struct SdpOptions {
  double tol = 1e-8;
  int max_iters = 100000;
  double rho = 1.0;
  double over_relax = 1.6;
  bool record_history = false;
};

struct SdpResult {
  double value = 0.0;
  std::vector<double> class_values;
  std::vector<double> gamma;  // side x side row-major, affine-feasible iterate
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::pair<double, double>> residual_history;
};

namespace detail {

// Projects class averages onto {R x = r} in the metric weighted by the class
// cell masses; the normal-equation matrix is factorized once. Dependent
// relations (common when normalization sums are generated per cell) are
// filtered out by Gaussian elimination first.
class RelationProjector {
 public:
  RelationProjector(const SemidefiniteProgram& p, const std::vector<double>& w) : p_(&p), w_(w) {
    if (p.relations.empty()) return;
    const int nc = static_cast<int>(w.size());
    std::vector<std::vector<double>> dense;
    std::vector<int> rows;
    for (size_t a = 0; a < p.relations.size(); ++a) {
      std::vector<double> row(nc, 0.0);
      for (const auto& [k, v] : p.relations[a]) row[k] = v;
      dense.push_back(std::move(row));
      rows.push_back(static_cast<int>(a));
    }
    // Keep a maximal independent subset of relation rows.
    int rank = 0;
    for (int col = 0; col < nc && rank < static_cast<int>(dense.size()); ++col) {
      int piv = -1;
      double best = 1e-9;
      for (int r = rank; r < static_cast<int>(dense.size()); ++r)
        if (std::abs(dense[r][col]) > best) { best = std::abs(dense[r][col]); piv = r; }
      if (piv < 0) continue;
      std::swap(dense[rank], dense[piv]);
      std::swap(rows[rank], rows[piv]);
      for (int r = 0; r < static_cast<int>(dense.size()); ++r) {
        if (r == rank) continue;
        const double f = dense[r][col] / dense[rank][col];
        if (f == 0.0) continue;
        for (int c = col; c < nc; ++c) dense[r][c] -= f * dense[rank][c];
      }
      ++rank;
    }
    keep_.assign(rows.begin(), rows.begin() + rank);

    const int m = rank;
    if (m == 0) return;
    std::vector<double> rwrt(static_cast<size_t>(m) * m, 0.0);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double s = 0.0;
        for (const auto& [ka, va] : p.relations[keep_[a]])
          for (const auto& [kb, vb] : p.relations[keep_[b]])
            if (ka == kb) s += va * vb / w_[ka];
        rwrt[static_cast<size_t>(a) * m + b] = s;
      }
    chol_ = cholesky(rwrt, m);
  }

  void apply(std::vector<double>& x) const {
    const int m = static_cast<int>(keep_.size());
    if (m == 0) return;
    std::vector<double> resid(m, 0.0);
    for (int a = 0; a < m; ++a) {
      double s = -p_->relation_rhs[keep_[a]];
      for (const auto& [k, v] : p_->relations[keep_[a]]) s += v * x[k];
      resid[a] = s;
    }
    const std::vector<double> lam = solve(chol_, m, resid);
    for (int a = 0; a < m; ++a)
      for (const auto& [k, v] : p_->relations[keep_[a]]) x[k] -= v * lam[a] / w_[k];
  }

 private:
  static std::vector<double> cholesky(std::vector<double> a, int n) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = a[static_cast<size_t>(i) * n + j];
        for (int k = 0; k < j; ++k)
          s -= a[static_cast<size_t>(i) * n + k] * a[static_cast<size_t>(j) * n + k];
        if (i == j) {
          if (s <= 1e-14)
            throw std::runtime_error("sdp: linearly dependent relations");
          a[static_cast<size_t>(i) * n + j] = std::sqrt(s);
        } else {
          a[static_cast<size_t>(i) * n + j] = s / a[static_cast<size_t>(j) * n + j];
        }
      }
    }
    return a;
  }

  static std::vector<double> solve(const std::vector<double>& l, int n, std::vector<double> b) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < i; ++k) b[i] -= l[static_cast<size_t>(i) * n + k] * b[k];
      b[i] /= l[static_cast<size_t>(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
      for (int k = i + 1; k < n; ++k) b[i] -= l[static_cast<size_t>(k) * n + i] * b[k];
      b[i] /= l[static_cast<size_t>(i) * n + i];
    }
    return b;
  }

  const SemidefiniteProgram* p_;
  std::vector<double> w_;
  std::vector<int> keep_;
  std::vector<double> chol_;
};

}  // namespace detail

// Frobenius-nearest PSD matrix: eigendecompose and clip negatives.
inline std::vector<double> psd_project(const std::vector<double>& a, int n) {
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(a[static_cast<size_t>(i) * n + j] - a[static_cast<size_t>(j) * n + i]) > 1e-10)
        throw std::invalid_argument("psd_project: matrix is not symmetric");
  const la::SymEigResult eig = la::symmetric_eig(a, n);
  std::vector<double> out(static_cast<size_t>(n) * n, 0.0);
  for (int k = 0; k < n; ++k) {
    const double lam = eig.values[k];
    if (lam <= 0.0) continue;
    for (int i = 0; i < n; ++i) {
      const double vik = eig.vec(i, k) * lam;
      for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] += vik * eig.vec(j, k);
    }
  }
  return out;
}

inline SdpResult sdp_solve(const SemidefiniteProgram& p, const SdpOptions& opts = {}) {
  p.validate();
  const int n = p.side;
  const size_t nn = static_cast<size_t>(n) * n;
  const int nc = static_cast<int>(p.classes.size());

  std::vector<double> w(nc, 0.0);
  for (int k = 0; k < nc; ++k)
    for (const auto& c : p.classes[k]) w[k] += c.coeff * c.coeff;
  detail::RelationProjector rel(p, w);

  // C with <C, X> = objective for X in the affine subspace.
  std::vector<double> cmat(nn, 0.0);
  for (int k = 0; k < nc; ++k)
    for (const auto& c : p.classes[k])
      cmat[static_cast<size_t>(c.i) * n + c.j] = p.objective[k] * c.coeff / w[k];

  std::vector<double> xcls(nc, 0.0);
  auto project_affine = [&](const std::vector<double>& z, std::vector<double>& out) {
    for (int k = 0; k < nc; ++k) {
      double s = 0.0;
      for (const auto& c : p.classes[k]) s += c.coeff * z[static_cast<size_t>(c.i) * n + c.j];
      xcls[k] = s / w[k];
    }
    rel.apply(xcls);
    for (int k = 0; k < nc; ++k)
      for (const auto& c : p.classes[k])
        out[static_cast<size_t>(c.i) * n + c.j] = c.coeff * xcls[k];
    for (const auto& [c, v] : p.fixed) out[static_cast<size_t>(c.i) * n + c.j] = c.coeff * v;
  };

  std::vector<double> x(nn, 0.0), z(nn, 0.0), u(nn, 0.0), xhat(nn, 0.0), tmp(nn, 0.0);
  project_affine(z, x);
  z = x;

  SdpResult res;
  const double alpha = opts.over_relax;
  double rprim = 0.0, rdual = 0.0;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    // X-update: affine projection of Z - U + C/rho.
    for (size_t i = 0; i < nn; ++i) tmp[i] = z[i] - u[i] + cmat[i] / opts.rho;
    project_affine(tmp, x);

    for (size_t i = 0; i < nn; ++i) xhat[i] = alpha * x[i] + (1.0 - alpha) * z[i];

    for (size_t i = 0; i < nn; ++i) tmp[i] = 0.5 * (xhat[i] + u[i]);
    // Symmetrize before the eigensolve; roundoff drifts the iterates.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) {
        const double m = 0.5 * (tmp[static_cast<size_t>(i) * n + j] +
                                tmp[static_cast<size_t>(j) * n + i]);
        tmp[static_cast<size_t>(i) * n + j] = tmp[static_cast<size_t>(j) * n + i] = m;
      }
    for (size_t i = 0; i < nn; ++i) tmp[i] *= 2.0;
    const std::vector<double> znew = psd_project(tmp, n);

    double pr = 0.0, du = 0.0;
    for (size_t i = 0; i < nn; ++i) {
      const double d1 = x[i] - znew[i];
      const double d2 = znew[i] - z[i];
      pr += d1 * d1;
      du += d2 * d2;
    }
    rprim = std::sqrt(pr);
    rdual = opts.rho * std::sqrt(du);
    z = znew;
    for (size_t i = 0; i < nn; ++i) u[i] += xhat[i] - z[i];

    if (opts.record_history) res.residual_history.emplace_back(rprim, rdual);
    if (std::max(rprim, rdual) < opts.tol) {
      ++it;
      res.converged = true;
      break;
    }
  }

  // Report from the affine-feasible side: classes hold exactly, PSD within
  // the primal residual.
  project_affine(z, x);
  res.gamma = x;
  res.class_values = xcls;
  res.value = p.objective_constant;
  for (int k = 0; k < nc; ++k) res.value += p.objective[k] * xcls[k];
  res.primal_residual = rprim;
  res.dual_residual = rdual;
  res.iterations = it;
  return res;
}

}  // namespace nlg::opt
