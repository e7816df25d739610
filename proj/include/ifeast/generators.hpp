#pragma once

#include <cstdint>
#include <vector>

#include "ifeast/dense.hpp"
#include "ifeast/operator.hpp"

namespace ifeast {

/// diag(values) as sparse storage.
HermitianOperator make_diagonal(const std::vector<double>& values);

/// (G + G^T) / 2 with G uniform in [-1, 1].
DenseMatrix random_symmetric_dense(std::size_t n, std::uint64_t seed);

/// (G + G^H) / 2 with real and imaginary parts of G uniform in [-1, 1].
DenseMatrix random_hermitian_dense(std::size_t n, std::uint64_t seed);

/// Real-space Hamiltonian -1/2 Laplacian + V on the grid points inside a
/// sphere, with an eighth-order finite-difference Laplacian and two
/// Gaussian wells on the z axis. A stand-in with the sparsity and spectral
/// shape of small electronic structure matrices.
struct DimerSurrogate {
  double sphere_radius = 5.7;  // in grid spacings
  double spacing = 0.6;
  double well_depth = 6.0;
  double well_width = 1.2;
  double bond_length = 2.2;
};
HermitianOperator make_dimer_surrogate(const DimerSurrogate& params = {});

}  // namespace ifeast
