#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ifeast/dense.hpp"

namespace ifeast {

enum class Symmetry { real_symmetric, complex_hermitian };

/// Compressed sparse rows with complex entries. Both triangles are stored.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;  // n + 1 entries
  std::vector<std::size_t> col_idx;
  std::vector<Complex> values;

  std::size_t nnz() const noexcept { return values.size(); }
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  Complex value;
};

/// Builds CSR from 0-based triplets; duplicates are summed, columns sorted per row.
CsrMatrix csr_from_triplets(std::size_t n, std::span<const Triplet> triplets);

/// The Hermitian matrix A, stored sparse or given as an apply rule.
///
/// apply() is read-only and safe to call from several workers at once; the
/// matvec counter is the only shared mutable state and is atomic.
class HermitianOperator {
public:
  using ApplyRule = std::function<void(std::span<const Complex>, std::span<Complex>)>;

  HermitianOperator(CsrMatrix csr, Symmetry symmetry);
  /// Callback operator. A non-positive norm_bound is replaced by a power
  /// iteration estimate (not counted as matvecs).
  HermitianOperator(std::size_t n, ApplyRule rule, Symmetry symmetry, double norm_bound = 0.0);

  HermitianOperator(HermitianOperator&&) noexcept = default;
  HermitianOperator& operator=(HermitianOperator&&) noexcept = default;

  std::size_t size() const noexcept { return n_; }
  Symmetry symmetry() const noexcept { return symmetry_; }
  bool is_real_symmetric() const noexcept { return symmetry_ == Symmetry::real_symmetric; }
  bool is_sparse() const noexcept { return !rule_; }
  const CsrMatrix& csr() const;

  /// Upper bound on ||A||_2 (max absolute row sum for sparse storage).
  double norm_estimate() const noexcept { return norm_est_; }

  /// y = A x; counts one matvec.
  void apply(std::span<const Complex> x, std::span<Complex> y) const;
  /// A X column by column; counts X.cols() matvecs.
  VectorBlock apply(const VectorBlock& x) const;

  std::uint64_t matvec_count() const noexcept { return counter_->load(std::memory_order_relaxed); }
  void reset_matvec_count() noexcept { counter_->store(0); }

  /// Dense copy of A (not counted).
  DenseMatrix to_dense() const;

private:
  void apply_uncounted(std::span<const Complex> x, std::span<Complex> y) const;

  std::size_t n_ = 0;
  Symmetry symmetry_ = Symmetry::real_symmetric;
  CsrMatrix csr_;
  ApplyRule rule_;
  double norm_est_ = 0.0;
  std::unique_ptr<std::atomic<std::uint64_t>> counter_;
};

/// Wraps a dense Hermitian matrix as sparse storage (explicit zeros dropped).
HermitianOperator operator_from_dense(const DenseMatrix& a);

}  // namespace ifeast
