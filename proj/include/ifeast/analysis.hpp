#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ifeast/contour.hpp"
#include "ifeast/dense.hpp"
#include "ifeast/operator.hpp"
#include "ifeast/shifted_krylov.hpp"

namespace ifeast {

/// Delta = sum over the full circle of |w_k| / min_j |z_k - lambda_j|, the
/// 2-norm sum of w_k (z_k I - A)^{-1} for normal A.
double delta_value(const ContourRule& rule, const std::vector<double>& eigvals);

struct FilterSpectrum {
  std::vector<Complex> gammas;     // rho(lambda_j), descending magnitude
  std::vector<std::size_t> order;  // gammas[i] belongs to eigvals[order[i]]
};

/// Stable sort, so equal magnitudes keep ascending-lambda order.
FilterSpectrum filter_spectrum(const ContourRule& rule, const std::vector<double>& eigvals);

/// (|gamma_{m0+1}| + alpha_j Delta) / |gamma_j| for 1 <= j <= m0 < n.
/// Returns +inf when gamma_j vanishes.
double predicted_rate(std::size_t j, std::size_t m0, double alpha_j, const ContourRule& rule,
                      const std::vector<double>& eigvals);

struct ObliqueError {
  std::vector<Complex> coeffs;  // c with (X1^H Q) c = e_j
  std::vector<Complex> q;       // Q c
  double w_norm = 0.0;          // ||q - x_j||
};

/// The vector of span(Q) whose X1 components are exactly e_j.
/// Throws Error("analysis") when X1^H Q is singular.
ObliqueError oblique_error(const VectorBlock& q, const VectorBlock& x1, std::size_t j);

struct BoundConfig {
  std::size_t m0 = 0;
  std::size_t nc_up = 4;
  double alpha = 0.1;  // inner tolerance factor; 0 selects exact dense solves
  SolverKind solver = SolverKind::minres;
  std::uint64_t seed = 1;
  std::size_t n_iters = 5;
  std::size_t max_inner = 0;
  double resolution = 1e-6;  // pairs with ||w_j|| below this are not assessed
};

struct BoundEntry {
  std::size_t iter = 0;
  std::size_t j = 0;        // 1-based rank by |gamma|
  double lambda = 0.0;
  double gamma_abs = 0.0;
  double w_norm = 0.0;
  double w_next_norm = 0.0;     // ||gamma_j^{-1} Q_next c - x_j||
  double w_next_oblique = 0.0;  // oblique error in the next Ritz block
  double epsilon = 0.0;         // max_k ||R_k c||
  double alpha_j = 0.0;
  double predicted = 0.0;
  double observed = 0.0;
  bool condition = false;  // alpha_j Delta < |gamma_j| - |gamma_{m0+1}|
  bool holds = true;       // observed <= predicted + 1e-8
  bool skipped = false;
  std::string note;
};

struct BoundReport {
  double delta = 0.0;
  double gamma_next = 0.0;  // |gamma_{m0+1}|
  std::vector<BoundEntry> entries;
  std::size_t flagged_iterations = 0;  // iterations with an assessed, flagged pair
  bool all_hold = true;                // every flagged entry satisfied the bound
};

inline constexpr double bound_slack = 1e-8;
inline constexpr std::size_t verify_bound_limit = 500;

/// Instrumented subspace iteration that measures both sides of the
/// inexact-filter error bound against the dense oracle.
BoundReport verify_bound(const HermitianOperator& op, double lambda_min, double lambda_max,
                         const BoundConfig& cfg);

struct BlockKrylov {
  VectorBlock v;                         // orthonormal basis, blocks side by side
  DenseMatrix h;                         // V^H A V
  std::vector<std::size_t> block_sizes;  // after deflation
  std::vector<std::vector<DenseMatrix>> blocks;  // blocks[s][i] = H_{i,s}
};

/// Explicit block Arnoldi on K_k(A, X0) with full reorthogonalization.
BlockKrylov block_arnoldi(const HermitianOperator& op, const VectorBlock& x0, std::size_t k);

struct RestartRecord {
  std::size_t restart = 0;
  std::size_t inside_count = 0;
  double max_inside_residual = 0.0;
  std::vector<double> ritz_values;  // the kept block
};

struct ArnoldiRestartResult {
  std::vector<double> values;    // kept Ritz values, ascending
  VectorBlock vectors;
  std::vector<double> residuals;
  std::vector<RestartRecord> history;
  std::vector<std::string> warnings;
};

/// Restarted block Arnoldi with degree k - 1. Each cycle keeps the m0 Ritz
/// vectors with the largest |rho(theta)|, i.e. those inside the contour
/// first, and restarts from them.
ArnoldiRestartResult restarted_block_arnoldi(const HermitianOperator& op, const VectorBlock& x0,
                                             std::size_t k, const ContourRule& rule,
                                             std::size_t n_restarts);

struct EquivalenceReport {
  double deviation = 0.0;  // ||Q_a - Q_b||_F / ||Q_b||_F
  VectorBlock q_fom;
  VectorBlock q_arnoldi;
};

/// Q_a from k fixed block FOM steps, Q_b = V rho(H) V^H X0 from explicit
/// block Arnoldi on the same Krylov space.
EquivalenceReport fom_equivalence(const HermitianOperator& op, const VectorBlock& x0,
                                  std::size_t k, const ContourRule& rule);
double fom_equivalence_check(const HermitianOperator& op, const VectorBlock& x0, std::size_t k,
                             const ContourRule& rule);

/// Sine of the largest principal angle between span(a) and span(b).
double max_principal_sine(const VectorBlock& a, const VectorBlock& b);

}  // namespace ifeast
