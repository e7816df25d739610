#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ifeast/dense.hpp"
#include "ifeast/operator.hpp"

namespace ifeast {

enum class SolverKind { minres, fom, gmres, direct };

std::string_view to_string(SolverKind kind);
SolverKind solver_kind_from_string(std::string_view name);

/// The block of shifted systems (z_k I - A) Y_k = X.
///
/// tol_abs bounds ||x_j - (z_k I - A) y_kj|| for every shift and column.
/// tol_abs == 0 disables the tolerance and runs exactly max_inner steps.
/// max_inner == 0 selects the default 10 n.
struct ShiftedSolveRequest {
  const HermitianOperator& op;
  std::span<const Complex> shifts;
  const VectorBlock& rhs;
  double tol_abs = 0.0;
  std::size_t max_inner = 0;
  std::size_t threads = 1;
};

struct ShiftedSolveReport {
  std::size_t shift_count = 0;
  std::size_t column_count = 0;
  std::vector<std::size_t> iterations;  // lane (k, j) at k * column_count + j
  std::vector<double> residual_norms;   // recurrence residual, absolute
  std::vector<char> lane_converged;
  bool converged = false;               // every lane met tol_abs
  std::uint64_t matvecs_total = 0;      // operator applications during the solve
  std::uint64_t matvecs_sequential = 0; // longest lane recurrence
  std::uint64_t lane_iterations_total = 0;  // sum over lanes (per-shift solver convention)

  std::size_t lane(std::size_t k, std::size_t j) const { return k * column_count + j; }
  std::size_t max_iterations() const;
  std::size_t max_iterations_for_shift(std::size_t k) const;
  double max_residual() const;
};

struct ShiftedSolveResult {
  std::vector<VectorBlock> y;  // one block per shift, same order as request.shifts
  ShiftedSolveReport report;
};

/// Shifted MINRES. One Lanczos recurrence on A per rhs column is shared by
/// all shifts; each shift keeps its own Givens QR of the shifted tridiagonal
/// and updates its iterate by short recurrence. Every lane takes at least
/// one step.
ShiftedSolveResult solve_shifted_minres(const ShiftedSolveRequest& req);

/// Shifted block FOM. One block Arnoldi recurrence (block size = number of
/// columns) is shared by all shifts; the Galerkin solution of each shift is
/// V (zI - H)^{-1} V^H X. A lane that has converged keeps the iterate from
/// the step at which it converged. The basis is stored, so memory grows
/// with the step count.
ShiftedSolveResult solve_shifted_fom(const ShiftedSolveRequest& req);

/// Restart-free GMRES, one Arnoldi recurrence per (shift, column) lane.
/// Memory grows with the iteration count.
ShiftedSolveResult solve_shifted_gmres(const ShiftedSolveRequest& req);

ShiftedSolveResult solve_shifted(SolverKind kind, const ShiftedSolveRequest& req);

}  // namespace ifeast
