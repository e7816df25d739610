#pragma once

#include <cstddef>
#include <vector>

#include "ifeast/dense.hpp"
#include "ifeast/operator.hpp"

namespace ifeast {

struct Orthonormalized {
  VectorBlock q;         // n x rank, orthonormal columns
  std::size_t rank = 0;
};

/// Rank-revealing Gram-Schmidt (two passes per column). A column is dropped
/// when less than drop_tol of its norm survives projection onto the columns
/// already accepted. All-zero input yields rank 0.
Orthonormalized orthonormalize(const VectorBlock& x, double drop_tol = 1e-10);

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // unitary, column j pairs with values[j]
};

inline constexpr std::size_t dense_eig_limit = 10'000;

/// Hermitian eigendecomposition: Householder tridiagonalization followed by
/// implicit QL. Real symmetric input produces real eigenvectors.
EigenDecomposition dense_eig(const DenseMatrix& a);
EigenDecomposition dense_eig(const HermitianOperator& op);

/// The Rayleigh-Ritz pencil (Q^H A Q, Q^H Q).
struct ReducedPencil {
  DenseMatrix a;
  DenseMatrix b;
};

struct ReducedSolution {
  std::vector<double> values;  // ascending, effective_dim entries
  DenseMatrix vectors;         // m0 x effective_dim, B-orthonormal
  std::size_t effective_dim = 0;
  bool truncated = false;      // spectral truncation path was taken
  double b_condition = 0.0;
};

inline constexpr double reduced_cholesky_cond_limit = 1e12;
inline constexpr double reduced_truncation_ratio = 1e-14;

/// Solves A_Q X = B_Q X diag(values). Cholesky reduction when cond(B_Q) is
/// below reduced_cholesky_cond_limit; otherwise B_Q is spectrally truncated
/// (eigenvalues under reduced_truncation_ratio * max dropped) and the
/// problem is solved on the surviving subspace.
ReducedSolution reduced_solve(const ReducedPencil& pencil);

/// LU factorization (partial pivoting) of zI - A for repeated solves.
class ShiftedFactorization {
public:
  /// Throws PoleError when a pivot falls below 1e-14 * max(||A||, |z|).
  ShiftedFactorization(const DenseMatrix& a, Complex z, double a_norm);

  Complex shift() const noexcept { return z_; }
  VectorBlock solve(const VectorBlock& rhs) const;

private:
  std::size_t n_ = 0;
  Complex z_;
  DenseMatrix lu_;
  std::vector<std::size_t> pivots_;
};

/// Y with (zI - A) Y = X, via dense LU.
VectorBlock dense_shifted_solve(const HermitianOperator& op, Complex z, const VectorBlock& x);

}  // namespace ifeast
