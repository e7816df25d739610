#include "ifeast/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "ifeast/errors.hpp"

namespace ifeast {

std::string format_complex(std::complex<double> z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

Orthonormalized orthonormalize(const VectorBlock& x, double drop_tol) {
  const std::size_t n = x.rows();
  std::vector<std::size_t> kept;
  VectorBlock q(n, x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    auto v = q.col(kept.size());
    std::copy(x.col(j).begin(), x.col(j).end(), v.begin());
    const double original = norm2(v);
    if (original == 0.0 || !std::isfinite(original)) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto qi = q.col(i);
        axpy(-dot(qi, v), qi, v);
      }
    }
    const double remaining = norm2(v);
    if (remaining <= drop_tol * original) continue;
    scale(1.0 / remaining, v);
    kept.push_back(j);
  }
  Orthonormalized out;
  out.rank = kept.size();
  out.q = q.columns(0, out.rank);
  return out;
}

namespace {

// Implicit QL on a real symmetric tridiagonal matrix (diagonal d, coupling
// e[i] between i and i+1). Rotations are accumulated into z (n x n, column-major).
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z,
                    std::size_t n) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m = l;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (iter++ == 200) throw Error("core-la", "dense_eig: QL iteration failed to converge");

      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      bool deflated = false;
      for (std::size_t i = m; i-- > l;) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        double* zi = z.data() + i * n;
        double* zi1 = z.data() + (i + 1) * n;
        for (std::size_t k = 0; k < n; ++k) {
          f = zi1[k];
          zi1[k] = s * zi[k] + c * f;
          zi[k] = c * zi[k] - s * f;
        }
      }
      if (deflated) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }
}

}  // namespace

EigenDecomposition dense_eig(const DenseMatrix& input) {
  if (input.rows() != input.cols()) throw std::invalid_argument("dense_eig: matrix not square");
  const std::size_t n = input.rows();
  if (n > dense_eig_limit)
    throw Error("core-la", "dense_eig: dimension " + std::to_string(n) + " exceeds dense limit " +
                               std::to_string(dense_eig_limit));
  EigenDecomposition out;
  if (n == 0) return out;

  DenseMatrix a = input;
  hermitianize(a);
  DenseMatrix q = DenseMatrix::identity(n);

  // Householder reduction to Hermitian tridiagonal form, A = Q T Q^H.
  std::vector<Complex> v(n), p(n), w(n), s(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    const auto column = a.col(k).subspan(k + 1, m);
    const double alpha = norm2(column);
    if (alpha == 0.0) continue;
    const Complex x0 = column[0];
    const Complex phase = std::abs(x0) == 0.0 ? Complex{1.0} : x0 / std::abs(x0);
    const Complex beta = -phase * alpha;
    std::copy(column.begin(), column.end(), v.begin());
    v[0] -= beta;
    double vnorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) vnorm2 += std::norm(v[i]);
    const double tau = 2.0 / vnorm2;

    std::fill_n(p.begin(), m, Complex{});
    for (std::size_t j = 0; j < m; ++j) {
      const Complex vj = tau * v[j];
      const auto aj = a.col(k + 1 + j).subspan(k + 1, m);
      for (std::size_t i = 0; i < m; ++i) p[i] += aj[i] * vj;
    }
    Complex vp = 0.0;
    for (std::size_t i = 0; i < m; ++i) vp += std::conj(v[i]) * p[i];
    const double kk = 0.5 * tau * vp.real();
    for (std::size_t i = 0; i < m; ++i) w[i] = p[i] - kk * v[i];
    for (std::size_t j = 0; j < m; ++j) {
      const Complex cwj = std::conj(w[j]);
      const Complex cvj = std::conj(v[j]);
      auto aj = a.col(k + 1 + j).subspan(k + 1, m);
      for (std::size_t i = 0; i < m; ++i) aj[i] -= v[i] * cwj + w[i] * cvj;
    }
    a(k + 1, k) = beta;
    a(k, k + 1) = std::conj(beta);
    for (std::size_t i = k + 2; i < n; ++i) {
      a(i, k) = 0.0;
      a(k, i) = 0.0;
    }

    // Q <- Q (I - tau v v^H) on columns k+1..n-1.
    std::fill(s.begin(), s.end(), Complex{});
    for (std::size_t j = 0; j < m; ++j) axpy(v[j], q.col(k + 1 + j), s);
    for (std::size_t j = 0; j < m; ++j) axpy(-tau * std::conj(v[j]), s, q.col(k + 1 + j));
  }

  // Diagonal unitary scaling makes the off-diagonal real and nonnegative.
  std::vector<double> d(n), e(n, 0.0);
  std::vector<Complex> delta(n, Complex{1.0});
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i).real();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Complex sub = a(i + 1, i);
    const double mag = std::abs(sub);
    e[i] = mag;
    delta[i + 1] = mag > 0.0 ? delta[i] * (sub / mag) : delta[i];
  }
  for (std::size_t j = 0; j < n; ++j)
    if (delta[j] != Complex{1.0}) scale(delta[j], q.col(j));

  std::vector<double> z(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) z[i * n + i] = 1.0;
  tridiagonal_ql(d, e, z, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });

  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (std::size_t jj = 0; jj < n; ++jj) {
    const std::size_t j = order[jj];
    out.values[jj] = d[j];
    auto target = out.vectors.col(jj);
    const double* zj = z.data() + j * n;
    for (std::size_t k = 0; k < n; ++k) {
      if (zj[k] == 0.0) continue;
      axpy(zj[k], q.col(k), target);
    }
  }
  return out;
}

EigenDecomposition dense_eig(const HermitianOperator& op) {
  if (op.size() > dense_eig_limit)
    throw Error("core-la", "dense_eig: dimension " + std::to_string(op.size()) +
                               " exceeds dense limit " + std::to_string(dense_eig_limit));
  return dense_eig(op.to_dense());
}

namespace {

// Lower Cholesky factor of a Hermitian matrix; false when not numerically
// positive definite.
bool cholesky(const DenseMatrix& b, DenseMatrix& l) {
  const std::size_t n = b.rows();
  l = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = b(j, j).real();
    for (std::size_t k = 0; k < j; ++k) diag -= std::norm(l(j, k));
    if (!(diag > 0.0)) return false;
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Complex sum = b(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * std::conj(l(j, k));
      l(i, j) = sum / ljj;
    }
  }
  return true;
}

// Solves L Y = B in place (L lower triangular).
void forward_solve(const DenseMatrix& l, DenseMatrix& b) {
  const std::size_t n = l.rows();
  for (std::size_t c = 0; c < b.cols(); ++c) {
    auto col = b.col(c);
    for (std::size_t i = 0; i < n; ++i) {
      Complex sum = col[i];
      for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * col[k];
      col[i] = sum / l(i, i);
    }
  }
}

// Solves L^H Y = B in place.
void adjoint_back_solve(const DenseMatrix& l, DenseMatrix& b) {
  const std::size_t n = l.rows();
  for (std::size_t c = 0; c < b.cols(); ++c) {
    auto col = b.col(c);
    for (std::size_t i = n; i-- > 0;) {
      Complex sum = col[i];
      for (std::size_t k = i + 1; k < n; ++k) sum -= std::conj(l(k, i)) * col[k];
      col[i] = sum / std::conj(l(i, i));
    }
  }
}

}  // namespace

ReducedSolution reduced_solve(const ReducedPencil& pencil) {
  const std::size_t m = pencil.a.rows();
  if (pencil.a.cols() != m || pencil.b.rows() != m || pencil.b.cols() != m)
    throw std::invalid_argument("reduced_solve: A_Q and B_Q must be square and the same size");
  ReducedSolution out;
  if (m == 0) return out;

  DenseMatrix a = pencil.a;
  DenseMatrix b = pencil.b;
  hermitianize(a);
  hermitianize(b);

  const EigenDecomposition beig = dense_eig(b);
  const double bmax = beig.values.back();
  if (!(bmax > 0.0)) throw Error("core-la", "reduced_solve: B_Q has no positive eigenvalue");
  const double bmin = beig.values.front();
  out.b_condition = bmin > 0.0 ? bmax / bmin : std::numeric_limits<double>::infinity();

  DenseMatrix l;
  if (out.b_condition < reduced_cholesky_cond_limit && cholesky(b, l)) {
    DenseMatrix c = a;
    forward_solve(l, c);           // L^-1 A
    DenseMatrix ch = adjoint(c);   // A L^-H
    forward_solve(l, ch);          // L^-1 A L^-H
    const EigenDecomposition ceig = dense_eig(ch);
    out.values = ceig.values;
    out.vectors = ceig.vectors;
    adjoint_back_solve(l, out.vectors);
    out.effective_dim = m;
    return out;
  }

  // Spectral truncation: keep the well-conditioned part of B_Q.
  out.truncated = true;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < m; ++i)
    if (beig.values[i] > reduced_truncation_ratio * bmax) keep.push_back(i);
  DenseMatrix t(m, keep.size());
  for (std::size_t jj = 0; jj < keep.size(); ++jj) {
    const std::size_t j = keep[jj];
    const double inv = 1.0 / std::sqrt(beig.values[j]);
    for (std::size_t i = 0; i < m; ++i) t(i, jj) = beig.vectors(i, j) * inv;
  }
  DenseMatrix c = adjoint_multiply(t, multiply(a, t));
  hermitianize(c);
  const EigenDecomposition ceig = dense_eig(c);
  out.values = ceig.values;
  out.vectors = multiply(t, ceig.vectors);
  out.effective_dim = keep.size();
  return out;
}

ShiftedFactorization::ShiftedFactorization(const DenseMatrix& a, Complex z, double a_norm)
    : n_{a.rows()}, z_{z}, lu_(a.rows(), a.rows()), pivots_(a.rows()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("ShiftedFactorization: matrix not square");
  for (std::size_t j = 0; j < n_; ++j)
    for (std::size_t i = 0; i < n_; ++i) lu_(i, j) = (i == j ? z : Complex{}) - a(i, j);

  const double guard = 1e-14 * std::max(a_norm, std::abs(z));
  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n_; ++i) {
      const double v = std::abs(lu_(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (!(best > guard))
      throw PoleError("core-la",
                      "dense_shifted_solve: zI - A is numerically singular at z = " +
                          format_complex(z),
                      z);
    pivots_[k] = piv;
    if (piv != k)
      for (std::size_t j = 0; j < n_; ++j) std::swap(lu_(k, j), lu_(piv, j));
    const Complex inv = 1.0 / lu_(k, k);
    for (std::size_t i = k + 1; i < n_; ++i) lu_(i, k) *= inv;
    for (std::size_t j = k + 1; j < n_; ++j) {
      const Complex ukj = lu_(k, j);
      if (ukj == Complex{}) continue;
      auto colj = lu_.col(j);
      const auto colk = lu_.col(k);
      for (std::size_t i = k + 1; i < n_; ++i) colj[i] -= colk[i] * ukj;
    }
  }
}

VectorBlock ShiftedFactorization::solve(const VectorBlock& rhs) const {
  if (rhs.rows() != n_) throw std::invalid_argument("ShiftedFactorization::solve: row mismatch");
  VectorBlock y = rhs;
  for (std::size_t c = 0; c < y.cols(); ++c) {
    auto col = y.col(c);
    for (std::size_t k = 0; k < n_; ++k)
      if (pivots_[k] != k) std::swap(col[k], col[pivots_[k]]);
    for (std::size_t k = 0; k < n_; ++k) {
      const Complex yk = col[k];
      if (yk == Complex{}) continue;
      const auto lk = lu_.col(k);
      for (std::size_t i = k + 1; i < n_; ++i) col[i] -= lk[i] * yk;
    }
    for (std::size_t k = n_; k-- > 0;) {
      col[k] /= lu_(k, k);
      const Complex yk = col[k];
      if (yk == Complex{}) continue;
      const auto uk = lu_.col(k);
      for (std::size_t i = 0; i < k; ++i) col[i] -= uk[i] * yk;
    }
  }
  return y;
}

VectorBlock dense_shifted_solve(const HermitianOperator& op, Complex z, const VectorBlock& x) {
  if (x.rows() != op.size())
    throw std::invalid_argument("dense_shifted_solve: block rows do not match operator dimension");
  if (op.size() > dense_eig_limit)
    throw Error("core-la", "dense_shifted_solve: dimension exceeds dense limit");
  const ShiftedFactorization lu(op.to_dense(), z, op.norm_estimate());
  return lu.solve(x);
}

}  // namespace ifeast
