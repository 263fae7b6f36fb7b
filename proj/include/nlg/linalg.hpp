#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlg::la {

using cplx = std::complex<double>;

// Dense row-major complex matrix. Small sizes only; everything is O(n^3)
// without blocking.
class ComplexMatrix {
 public:
  ComplexMatrix() : rows_(0), cols_(0) {}
  ComplexMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, cplx(0, 0)) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("matrix dimensions must be positive");
  }

  static ComplexMatrix identity(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix zero(int n) { return ComplexMatrix(n, n); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  ComplexMatrix adjoint() const {
    ComplexMatrix m(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
  }

  double max_abs() const {
    double m = 0.0;
    for (const cplx& v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_hermitian(double tol = 1e-10) const {
    if (rows_ != cols_) return false;
    for (int i = 0; i < rows_; ++i)
      for (int j = i; j < cols_; ++j)
        if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
    return true;
  }

  friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
    check_same(a, b, "+");
    ComplexMatrix m = a;
    for (size_t i = 0; i < m.a_.size(); ++i) m.a_[i] += b.a_[i];
    return m;
  }
  friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
    check_same(a, b, "-");
    ComplexMatrix m = a;
    for (size_t i = 0; i < m.a_.size(); ++i) m.a_[i] -= b.a_[i];
    return m;
  }
  friend ComplexMatrix operator*(const cplx& s, const ComplexMatrix& a) {
    ComplexMatrix m = a;
    for (auto& v : m.a_) v *= s;
    return m;
  }
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_)
      throw std::invalid_argument("matrix product dimension mismatch: " + a.shape() + " x " +
                                  b.shape());
    ComplexMatrix m(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx(0, 0)) continue;
        for (int j = 0; j < b.cols_; ++j) m(i, j) += aik * b(k, j);
      }
    return m;
  }

  std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

 private:
  static void check_same(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw std::invalid_argument(std::string("matrix ") + op + " dimension mismatch: " +
                                  a.shape() + " vs " + b.shape());
  }

  int rows_, cols_;
  std::vector<cplx> a_;
};

// Pure multipartite state; amplitudes indexed party-0-major.
struct StateVector {
  std::vector<int> party_dims;
  std::vector<cplx> amplitudes;

  int total_dim() const {
    int d = 1;
    for (int k : party_dims) d *= k;
    return d;
  }

  void validate(double tol = 1e-10) const {
    if (party_dims.empty()) throw std::invalid_argument("state has no parties");
    for (int d : party_dims)
      if (d < 1) throw std::invalid_argument("state party dimension must be positive");
    if (static_cast<int>(amplitudes.size()) != total_dim())
      throw std::invalid_argument("state amplitude count does not match party dimensions");
    double norm2 = 0.0;
    for (const cplx& v : amplitudes) norm2 += std::norm(v);
    if (std::abs(std::sqrt(norm2) - 1.0) > tol)
      throw std::invalid_argument("state is not normalized: ||psi|| = " +
                                  std::to_string(std::sqrt(norm2)));
  }
};

inline constexpr std::int64_t kKronDimCap = 1 << 20;

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::int64_t r = static_cast<std::int64_t>(a.rows()) * b.rows();
  const std::int64_t c = static_cast<std::int64_t>(a.cols()) * b.cols();
  if (r > kKronDimCap || c > kKronDimCap)
    throw std::invalid_argument("kron: dimension " + std::to_string(r) + "x" + std::to_string(c) +
                                " exceeds cap 2^20");
  ComplexMatrix m(static_cast<int>(r), static_cast<int>(c));
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const cplx v = a(i, j);
      if (v == cplx(0, 0)) continue;
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          m(i * b.rows() + k, j * b.cols() + l) = v * b(k, l);
    }
  return m;
}

inline ComplexMatrix kron_all(const std::vector<ComplexMatrix>& factors) {
  if (factors.empty()) throw std::invalid_argument("kron_all: no factors");
  ComplexMatrix m = factors[0];
  for (size_t i = 1; i < factors.size(); ++i) m = kron(m, factors[i]);
  return m;
}

inline cplx expectation(const StateVector& psi, const ComplexMatrix& op) {
  const int n = psi.total_dim();
  if (op.rows() != n || op.cols() != n)
    throw std::invalid_argument("expectation: operator is " + op.shape() + " but state has dim " +
                                std::to_string(n));
  cplx acc(0, 0);
  for (int i = 0; i < n; ++i) {
    cplx row(0, 0);
    for (int j = 0; j < n; ++j) row += op(i, j) * psi.amplitudes[j];
    acc += std::conj(psi.amplitudes[i]) * row;
  }
  return acc;
}

struct EigResult {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // columns are eigenvectors
};

// Cyclic complex Jacobi. Adequate for the matrix sizes here (< a few
// hundred); NPA projections use the real-symmetric path below instead.
inline EigResult hermitian_eig(const ComplexMatrix& a_in, double tol = 1e-12) {
  if (!a_in.is_hermitian(1e-10))
    throw std::invalid_argument("hermitian_eig: matrix is not Hermitian within 1e-10");
  const int n = a_in.rows();
  ComplexMatrix a = a_in;
  ComplexMatrix v = ComplexMatrix::identity(n);
  const double scale = std::max(1.0, a.max_abs());

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off <= tol * scale) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= tol * scale * 1e-2) continue;
        // Phase rotation makes the pivot real, then a real Jacobi rotation
        // zeroes it.
        const cplx phase = apq / mag;  // e^{i phi}
        const double app = a(p, p).real(), aqq = a(q, q).real();
        const double theta = 0.5 * std::atan2(2.0 * mag, app - aqq);
        const double c = std::cos(theta), s = std::sin(theta);
        // Column transform J: col_p' = c*col_p + s*phase*col_q,
        //                     col_q' = -s*conj(phase)... applied as J = D*R
        // with D = diag(1, conj(phase)) on (p,q) and R the real rotation.
        const cplx jp_p = c;                      // J(p,p)
        const cplx jp_q = -s;                     // J(p,q)
        const cplx jq_p = std::conj(phase) * s;   // J(q,p)
        const cplx jq_q = std::conj(phase) * c;   // J(q,q)

        // A <- J^dag A J ; update columns then rows.
        for (int i = 0; i < n; ++i) {
          const cplx aip = a(i, p), aiq = a(i, q);
          a(i, p) = aip * jp_p + aiq * jq_p;
          a(i, q) = aip * jp_q + aiq * jq_q;
        }
        for (int j = 0; j < n; ++j) {
          const cplx apj = a(p, j), aqj = a(q, j);
          a(p, j) = std::conj(jp_p) * apj + std::conj(jq_p) * aqj;
          a(q, j) = std::conj(jp_q) * apj + std::conj(jq_q) * aqj;
        }
        a(p, q) = cplx(0, 0);
        a(q, p) = cplx(0, 0);
        for (int i = 0; i < n; ++i) {
          const cplx vip = v(i, p), viq = v(i, q);
          v(i, p) = vip * jp_p + viq * jq_p;
          v(i, q) = vip * jp_q + viq * jq_q;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
  EigResult r;
  r.values.resize(n);
  r.vectors = ComplexMatrix(n, n);
  for (int k = 0; k < n; ++k) {
    r.values[k] = a(order[k], order[k]).real();
    for (int i = 0; i < n; ++i) r.vectors(i, k) = v(i, order[k]);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Real symmetric eigensolver: Householder tridiagonalization followed by
// implicit-shift QL. This is the SDP projection hot path, so it avoids the
// Jacobi constant factor.

struct SymEigResult {
  std::vector<double> values;       // ascending
  std::vector<double> vectors;      // row-major n x n, column k = eigenvector k
  int n = 0;
  double vec(int i, int k) const { return vectors[static_cast<size_t>(i) * n + k]; }
};

inline SymEigResult symmetric_eig(const std::vector<double>& a_in, int n) {
  std::vector<double> z = a_in;  // becomes the accumulated transform
  std::vector<double> d(n, 0.0), e(n, 0.0);
  auto at = [&](int i, int j) -> double& { return z[static_cast<size_t>(i) * n + j]; };

  // Householder reduction (tred2 layout).
  for (int i = n - 1; i > 0; --i) {
    const int l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::abs(at(i, k));
      if (scale == 0.0) {
        e[i] = at(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          at(i, k) /= scale;
          h += at(i, k) * at(i, k);
        }
        double f = at(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        at(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          at(j, i) = at(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += at(j, k) * at(i, k);
          for (int k = j + 1; k <= l; ++k) g += at(k, j) * at(i, k);
          e[j] = g / h;
          f += e[j] * at(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = at(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) at(j, k) -= f * e[k] + g * at(i, k);
        }
      }
    } else {
      e[i] = at(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += at(i, k) * at(k, j);
        for (int k = 0; k <= l; ++k) at(k, j) -= g * at(k, i);
      }
    }
    d[i] = at(i, i);
    at(i, i) = 1.0;
    for (int j = 0; j <= l; ++j) at(j, i) = at(i, j) = 0.0;
  }

  // Implicit-shift QL on the tridiagonal (tqli layout).
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-300 || std::abs(e[m]) <= 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (++iter == 50) throw std::runtime_error("symmetric_eig: QL failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = (i >= l);
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = at(k, i + 1);
            at(k, i + 1) = s * at(k, i) + c * f;
            at(k, i) = c * at(k, i) - s * f;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return d[i] < d[j]; });
  SymEigResult r;
  r.n = n;
  r.values.resize(n);
  r.vectors.resize(static_cast<size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    r.values[k] = d[order[k]];
    for (int i = 0; i < n; ++i)
      r.vectors[static_cast<size_t>(i) * n + k] = at(i, order[k]);
  }
  return r;
}

}  // namespace nlg::la
