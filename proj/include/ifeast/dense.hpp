#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ifeast {

using Complex = std::complex<double>;

/// Column-major dense complex matrix. Doubles as the n x m vector block
/// type used for X, Q and the per-shift solution blocks Y_k.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_{rows}, cols_{cols}, data_(rows * cols) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return data_[j * rows_ + i];
  }

  std::span<Complex> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const Complex> col(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }

  /// Columns [first, first + count).
  DenseMatrix columns(std::size_t first, std::size_t count) const;
  void set_columns(std::size_t first, const DenseMatrix& block);

  /// True when every imaginary part is exactly zero.
  bool is_real() const noexcept;
  void drop_imaginary() noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

using VectorBlock = DenseMatrix;

// Dense kernels. Reductions run in ascending index order.

Complex dot(std::span<const Complex> x, std::span<const Complex> y);  // x^H y
double norm2(std::span<const Complex> x);
void axpy(Complex a, std::span<const Complex> x, std::span<Complex> y);
void scale(Complex a, std::span<Complex> x);

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
/// a^H b
DenseMatrix adjoint_multiply(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix adjoint(const DenseMatrix& a);
DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b);

double column_norm(const DenseMatrix& a, std::size_t j);
/// Max column 2-norm.
double block_norm(const DenseMatrix& a);
double frobenius_norm(const DenseMatrix& a);
/// Max absolute entry.
double max_abs(const DenseMatrix& a);

/// Normalizes each column to unit 2-norm; zero columns are left untouched.
void normalize_columns(DenseMatrix& a);

/// ||a - a^H||_F / max(||a||_F, tiny).
double hermitian_defect(const DenseMatrix& a);
void hermitianize(DenseMatrix& a);

}  // namespace ifeast
