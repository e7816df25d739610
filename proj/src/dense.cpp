#include "ifeast/dense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ifeast {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::columns(std::size_t first, std::size_t count) const {
  if (first + count > cols_) throw std::out_of_range("DenseMatrix::columns: range exceeds width");
  DenseMatrix out(rows_, count);
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(first * rows_), count * rows_,
              out.data_.begin());
  return out;
}

void DenseMatrix::set_columns(std::size_t first, const DenseMatrix& block) {
  if (block.rows_ != rows_ || first + block.cols_ > cols_)
    throw std::invalid_argument("DenseMatrix::set_columns: shape mismatch");
  std::copy(block.data_.begin(), block.data_.end(),
            data_.begin() + static_cast<std::ptrdiff_t>(first * rows_));
}

bool DenseMatrix::is_real() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](const Complex& c) { return c.imag() == 0.0; });
}

void DenseMatrix::drop_imaginary() noexcept {
  for (auto& c : data_) c = c.real();
}

Complex dot(std::span<const Complex> x, std::span<const Complex> y) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

double norm2(std::span<const Complex> x) {
  // Scaled accumulation keeps tiny and huge columns finite.
  double scale_v = 0.0;
  double ssq = 1.0;
  for (const auto& c : x) {
    for (double part : {c.real(), c.imag()}) {
      if (part == 0.0) continue;
      const double a = std::abs(part);
      if (scale_v < a) {
        ssq = 1.0 + ssq * (scale_v / a) * (scale_v / a);
        scale_v = a;
      } else {
        ssq += (a / scale_v) * (a / scale_v);
      }
    }
  }
  return scale_v * std::sqrt(ssq);
}

void axpy(Complex a, std::span<const Complex> x, std::span<Complex> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scale(Complex a, std::span<Complex> x) {
  for (auto& v : x) v *= a;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: inner dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto cj = c.col(j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex bkj = b(k, j);
      if (bkj == Complex{}) continue;
      axpy(bkj, a.col(k), cj);
    }
  }
  return c;
}

DenseMatrix adjoint_multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("adjoint_multiply: row mismatch");
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t i = 0; i < a.cols(); ++i) c(i, j) = dot(a.col(i), b.col(j));
  return c;
}

DenseMatrix adjoint(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) t(j, i) = std::conj(a(i, j));
  return t;
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("subtract: shape mismatch");
  DenseMatrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

double column_norm(const DenseMatrix& a, std::size_t j) { return norm2(a.col(j)); }

double block_norm(const DenseMatrix& a) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, column_norm(a, j));
  return m;
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.data()); }

double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (const auto& c : a.data()) m = std::max(m, std::abs(c));
  return m;
}

void normalize_columns(DenseMatrix& a) {
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double nrm = column_norm(a, j);
    if (nrm > 0.0) scale(1.0 / nrm, a.col(j));
  }
}

double hermitian_defect(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("hermitian_defect: matrix not square");
  double num = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) num += std::norm(a(i, j) - std::conj(a(j, i)));
  const double den = frobenius_norm(a);
  return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

void hermitianize(DenseMatrix& a) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    a(j, j) = a(j, j).real();
    for (std::size_t i = j + 1; i < n; ++i) {
      const Complex avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
      a(i, j) = avg;
      a(j, i) = std::conj(avg);
    }
  }
}

}  // namespace ifeast
