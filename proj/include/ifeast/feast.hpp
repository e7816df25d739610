#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ifeast/contour.hpp"
#include "ifeast/dense.hpp"
#include "ifeast/linalg.hpp"
#include "ifeast/operator.hpp"
#include "ifeast/shifted_krylov.hpp"

namespace ifeast {

struct IFEASTConfig {
  std::size_t m0 = 0;
  double alpha = 0.1;        // inner tolerance factor, 0 < alpha < 1
  double tol_outer = 1e-10;  // target eigenvector residual
  std::size_t max_outer = 50;
  std::size_t nc_up = 4;     // quadrature nodes on the upper half circle
  SolverKind solver = SolverKind::minres;
  std::uint64_t seed = 1;
  double initial_rf = 1.0;   // RF before the first iteration, also caps RF in the inner tolerance
  std::size_t max_inner = 0;  // 0 = 10 n
  std::size_t threads = 1;    // 0 = hardware concurrency

  friend bool operator==(const IFEASTConfig&, const IFEASTConfig&) = default;
};

/// Throws Error("feast-driver") describing the first invalid field.
void validate(const IFEASTConfig& cfg, std::size_t n);

struct IterationRecord {
  std::size_t iter = 0;
  double rf = 0.0;
  std::size_t inside_count = 0;
  double inner_tol = 0.0;
  std::vector<std::size_t> max_inner_per_shift;
  std::size_t max_inner = 0;
  bool inner_converged = true;
  std::uint64_t matvecs_sequential = 0;  // longest inner lane
  std::uint64_t matvecs_inner = 0;       // applications inside the shifted solves
  std::uint64_t matvecs_total = 0;       // every operator application this iteration
  std::uint64_t matvec_seq_cum = 0;
  std::uint64_t matvec_total_cum = 0;
  std::uint64_t lane_iterations_total = 0;  // inner work if each shift ran its own recurrence
  std::size_t effective_dim = 0;         // rank kept by the reduced solve

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

using IterationLog = std::vector<IterationRecord>;

enum class SolveStatus { converged, max_outer, empty };

std::string to_string(SolveStatus status);

struct EigenResult {
  std::vector<double> eigenvalues;  // inside the interval, ascending
  VectorBlock eigenvectors;         // unit columns
  std::vector<double> residuals;    // ||A x - lambda x|| per pair
  bool converged = false;
  SolveStatus status = SolveStatus::max_outer;
  std::size_t iterations = 0;
  IterationLog log;
  std::vector<std::string> warnings;

  friend bool operator==(const EigenResult&, const EigenResult&) = default;
};

/// Seeded uniform [-1, 1] block, orthonormalized.
VectorBlock initial_block(std::size_t n, std::size_t m0, std::uint64_t seed);

/// Cached dense LU factorizations of z_k I - A for the direct variant.
class DirectFilter {
public:
  DirectFilter(const HermitianOperator& op, const std::vector<Complex>& shifts);
  VectorBlock solve(std::size_t k, const VectorBlock& rhs) const { return lu_[k].solve(rhs); }
  std::size_t size() const noexcept { return lu_.size(); }

private:
  std::vector<ShiftedFactorization> lu_;
};

struct FilterStep {
  VectorBlock q;
  std::vector<VectorBlock> y;  // one block per solved shift
  std::vector<Complex> shifts;
  ContourRule rule;            // with the symmetrization actually used
  ShiftedSolveReport report;
};

/// One application of the quadrature filter to X. Uses the half contour
/// when A is real symmetric and X is real. direct == nullptr selects the
/// Krylov solver `solver`; otherwise the cached factorizations are used.
FilterStep apply_filter(const HermitianOperator& op, const ContourRule& rule, const VectorBlock& x,
                        SolverKind solver, double tol_abs, std::size_t max_inner,
                        std::size_t threads, const DirectFilter* direct = nullptr);

struct RitzResult {
  std::vector<double> values;  // ascending
  VectorBlock vectors;         // unit columns, same count as Q
  std::size_t effective_dim = 0;
  bool truncated = false;
};

/// Rayleigh-Ritz on the pencil (Q^H A Q, Q^H Q). When the reduced solve
/// drops directions, the block is refilled with fresh orthogonal columns
/// so the subspace dimension stays at Q.cols().
RitzResult rayleigh_ritz(const HermitianOperator& op, const VectorBlock& q, std::uint64_t seed = 0);

struct ResidualSummary {
  double rf = 0.0;
  std::size_t inside_count = 0;
  std::vector<double> residuals;  // every pair
  std::vector<char> inside;
};

/// RF is the maximum residual over pairs inside (lambda_min, lambda_max);
/// with no pair inside it is taken over all pairs.
ResidualSummary compute_residual(const HermitianOperator& op, const VectorBlock& x,
                                 const std::vector<double>& lambda, double lambda_min,
                                 double lambda_max);
ResidualSummary summarize_residuals(const VectorBlock& x, const VectorBlock& ax,
                                    const std::vector<double>& lambda, double lambda_min,
                                    double lambda_max);

bool inside_interval(double lambda, double lambda_min, double lambda_max);

/// Algorithm with machine-precision dense shifted solves (n <= dense_eig_limit).
EigenResult feast_direct(const HermitianOperator& op, double lambda_min, double lambda_max,
                         const IFEASTConfig& cfg);

/// Subspace iteration with inexact Krylov solves to tolerance
/// alpha * min(RF, initial_rf), RF taken from the previous iteration.
/// cfg.solver == direct forwards to feast_direct.
EigenResult ifeast_solve(const HermitianOperator& op, double lambda_min, double lambda_max,
                         const IFEASTConfig& cfg);

}  // namespace ifeast
