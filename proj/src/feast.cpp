#include "ifeast/feast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "ifeast/errors.hpp"
#include "ifeast/parallel.hpp"

namespace ifeast {

namespace {

constexpr double boundary_tie = 1e-14;

// Fresh columns orthogonal to `basis`, drawn from a seeded stream.
VectorBlock refill_columns(const VectorBlock& basis, std::size_t count, std::uint64_t seed) {
  const std::size_t n = basis.rows();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VectorBlock out(n, basis.cols() + count);
  out.set_columns(0, basis);
  std::size_t filled = basis.cols();
  for (std::size_t attempt = 0; filled < out.cols() && attempt < 10 * count + 10; ++attempt) {
    std::vector<Complex> v(n);
    for (auto& e : v) e = dist(rng);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < filled; ++j) axpy(-dot(out.col(j), v), out.col(j), v);
    }
    const double nv = norm2(v);
    if (nv < 1e-8) continue;
    auto dst = out.col(filled++);
    for (std::size_t i = 0; i < n; ++i) dst[i] = v[i] / nv;
  }
  if (filled < out.cols())
    throw Error("feast-driver", "rayleigh_ritz: cannot complete the search subspace");
  return out;
}

}  // namespace

void validate(const IFEASTConfig& cfg, std::size_t n) {
  auto fail = [](const std::string& msg) { throw Error("feast-driver", msg); };
  if (cfg.m0 == 0) fail("m0 must be positive");
  if (cfg.m0 > n) fail("m0 = " + std::to_string(cfg.m0) + " exceeds the dimension " +
                       std::to_string(n));
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    fail("alpha must lie in (0, 1), got " + std::to_string(cfg.alpha));
  if (!(cfg.tol_outer > 0.0)) fail("tol_outer must be positive");
  if (cfg.max_outer == 0) fail("max_outer must be positive");
  if (cfg.nc_up == 0) fail("nc_up must be positive");
  if (!(cfg.initial_rf > 0.0)) fail("initial_rf must be positive");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_outer: return "max_outer";
    case SolveStatus::empty: return "empty";
  }
  return "unknown";
}

VectorBlock initial_block(std::size_t n, std::size_t m0, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VectorBlock x(n, m0);
  for (auto& e : x.data()) e = dist(rng);
  Orthonormalized o = orthonormalize(x);
  if (o.rank < m0) return refill_columns(o.q, m0 - o.rank, seed + 1);
  return std::move(o.q);
}

DirectFilter::DirectFilter(const HermitianOperator& op, const std::vector<Complex>& shifts) {
  if (op.size() > dense_eig_limit)
    throw Error("feast-driver", "feast_direct: n = " + std::to_string(op.size()) +
                                    " exceeds the dense limit; use ifeast_solve");
  const DenseMatrix a = op.to_dense();
  lu_.reserve(shifts.size());
  for (Complex z : shifts) lu_.emplace_back(a, z, op.norm_estimate());
}

FilterStep apply_filter(const HermitianOperator& op, const ContourRule& rule, const VectorBlock& x,
                        SolverKind solver, double tol_abs, std::size_t max_inner,
                        std::size_t threads, const DirectFilter* direct) {
  FilterStep step;
  step.rule = rule;
  step.rule.symmetrized = op.is_real_symmetric() && x.is_real();
  step.shifts = solve_shifts(step.rule);

  if (direct != nullptr) {
    if (direct->size() < step.shifts.size())
      throw Error("feast-driver", "apply_filter: direct factorizations do not cover the shifts");
    step.y.resize(step.shifts.size());
    parallel_for(step.shifts.size(), threads,
                 [&](std::size_t k) { step.y[k] = direct->solve(k, x); });
    auto& r = step.report;
    r.shift_count = step.shifts.size();
    r.column_count = x.cols();
    r.iterations.assign(r.shift_count * r.column_count, 0);
    r.residual_norms.assign(r.shift_count * r.column_count, 0.0);
    r.lane_converged.assign(r.shift_count * r.column_count, 1);
    r.converged = true;
  } else {
    ShiftedSolveRequest req{op, step.shifts, x, tol_abs, max_inner, threads};
    ShiftedSolveResult res = solve_shifted(solver, req);
    step.y = std::move(res.y);
    step.report = std::move(res.report);
  }
  step.q = accumulate_q(step.rule, step.y);
  return step;
}

RitzResult rayleigh_ritz(const HermitianOperator& op, const VectorBlock& q, std::uint64_t seed) {
  const VectorBlock aq = op.apply(q);
  ReducedPencil pencil{adjoint_multiply(q, aq), adjoint_multiply(q, q)};
  const bool real = q.is_real() && aq.is_real();
  ReducedSolution red = reduced_solve(pencil);

  RitzResult out;
  out.effective_dim = red.effective_dim;
  out.truncated = red.truncated;
  VectorBlock x = multiply(q, red.vectors);
  if (real) x.drop_imaginary();
  normalize_columns(x);
  std::vector<double> values = red.values;

  if (red.effective_dim < q.cols()) {
    Orthonormalized kept = orthonormalize(x);
    x = refill_columns(kept.q, q.cols() - kept.rank, seed);
    // Re-extract on the completed, orthonormal block.
    const VectorBlock ax = op.apply(x);
    DenseMatrix h = adjoint_multiply(x, ax);
    hermitianize(h);
    EigenDecomposition e = dense_eig(h);
    x = multiply(x, e.vectors);
    if (real) x.drop_imaginary();
    normalize_columns(x);
    values = e.values;
  }
  out.values = std::move(values);
  out.vectors = std::move(x);
  return out;
}

bool inside_interval(double lambda, double lambda_min, double lambda_max) {
  if (lambda > lambda_min && lambda < lambda_max) return true;
  return std::abs(lambda - lambda_min) < boundary_tie || std::abs(lambda - lambda_max) < boundary_tie;
}

ResidualSummary summarize_residuals(const VectorBlock& x, const VectorBlock& ax,
                                    const std::vector<double>& lambda, double lambda_min,
                                    double lambda_max) {
  if (x.cols() != lambda.size() || ax.cols() != x.cols() || ax.rows() != x.rows())
    throw std::invalid_argument("compute_residual: block and eigenvalue counts differ");
  ResidualSummary s;
  s.residuals.resize(x.cols());
  s.inside.resize(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const auto xj = x.col(j);
    const auto axj = ax.col(j);
    std::vector<Complex> r(x.rows());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = axj[i] - lambda[j] * xj[i];
    s.residuals[j] = norm2(r);
    s.inside[j] = inside_interval(lambda[j], lambda_min, lambda_max) ? 1 : 0;
    if (s.inside[j]) {
      ++s.inside_count;
      s.rf = std::max(s.rf, s.residuals[j]);
    }
  }
  if (s.inside_count == 0)
    for (double r : s.residuals) s.rf = std::max(s.rf, r);
  return s;
}

ResidualSummary compute_residual(const HermitianOperator& op, const VectorBlock& x,
                                 const std::vector<double>& lambda, double lambda_min,
                                 double lambda_max) {
  return summarize_residuals(x, op.apply(x), lambda, lambda_min, lambda_max);
}

namespace {

EigenResult run_loop(const HermitianOperator& op, double lambda_min, double lambda_max,
                     const IFEASTConfig& cfg, const DirectFilter* direct) {
  validate(cfg, op.size());
  const ContourRule rule = build_trapezoid(lambda_min, lambda_max, cfg.nc_up);

  EigenResult result;
  VectorBlock x = initial_block(op.size(), cfg.m0, cfg.seed);
  double rf = cfg.initial_rf;
  std::uint64_t seq_cum = 0;
  std::uint64_t total_cum = 0;
  bool warned_m0 = false;
  bool warned_empty = false;
  std::vector<double> lambda;
  ResidualSummary summary;

  for (std::size_t iter = 1; iter <= cfg.max_outer; ++iter) {
    const std::uint64_t start = op.matvec_count();
    IterationRecord rec;
    rec.iter = iter;
    // RF is capped at initial_rf: a bound at or above the unit rhs norm is met
    // by Y = 0 and would freeze the iteration.
    rec.inner_tol = direct ? 0.0
                           : std::max(cfg.alpha * std::min(rf, cfg.initial_rf),
                                      std::numeric_limits<double>::min());

    const FilterStep step = apply_filter(op, rule, x, cfg.solver, rec.inner_tol, cfg.max_inner,
                                         cfg.threads, direct);
    RitzResult rr = rayleigh_ritz(op, step.q, cfg.seed + 7919 * iter);
    x = std::move(rr.vectors);
    lambda = std::move(rr.values);
    summary = compute_residual(op, x, lambda, lambda_min, lambda_max);
    rf = summary.rf;

    rec.rf = rf;
    rec.inside_count = summary.inside_count;
    rec.effective_dim = rr.effective_dim;
    rec.inner_converged = step.report.converged;
    rec.max_inner_per_shift.resize(step.report.shift_count);
    for (std::size_t k = 0; k < step.report.shift_count; ++k)
      rec.max_inner_per_shift[k] = step.report.max_iterations_for_shift(k);
    rec.max_inner = step.report.max_iterations();
    rec.matvecs_sequential = step.report.matvecs_sequential;
    rec.matvecs_inner = step.report.matvecs_total;
    rec.matvecs_total = op.matvec_count() - start;
    rec.lane_iterations_total = step.report.lane_iterations_total;
    seq_cum += rec.matvecs_sequential;
    total_cum += rec.matvecs_total;
    rec.matvec_seq_cum = seq_cum;
    rec.matvec_total_cum = total_cum;
    result.log.push_back(rec);

    if (!rec.inner_converged)
      result.warnings.push_back("iteration " + std::to_string(iter) +
                                ": inner solves hit the iteration cap");
    if (summary.inside_count == 0 && !warned_empty) {
      result.warnings.push_back("iteration " + std::to_string(iter) +
                                ": no Ritz value inside the interval; RF taken over all pairs");
      warned_empty = true;
    }
    if (summary.inside_count + 1 > cfg.m0 && !warned_m0) {
      result.warnings.push_back("inside count " + std::to_string(summary.inside_count) +
                                " exceeds m0 - 1; m0 may be too small");
      warned_m0 = true;
    }
    result.iterations = iter;
    if (summary.inside_count > 0 && rf <= cfg.tol_outer) {
      result.converged = true;
      break;
    }
  }

  result.status = result.converged ? SolveStatus::converged
                  : summary.inside_count == 0 ? SolveStatus::empty
                                              : SolveStatus::max_outer;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < lambda.size(); ++j)
    if (summary.inside[j]) keep.push_back(j);
  result.eigenvectors = VectorBlock(op.size(), keep.size());
  for (std::size_t t = 0; t < keep.size(); ++t) {
    result.eigenvalues.push_back(lambda[keep[t]]);
    result.residuals.push_back(summary.residuals[keep[t]]);
    result.eigenvectors.set_columns(t, x.columns(keep[t], 1));
  }
  return result;
}

}  // namespace

EigenResult feast_direct(const HermitianOperator& op, double lambda_min, double lambda_max,
                         const IFEASTConfig& cfg) {
  validate(cfg, op.size());
  ContourRule rule = build_trapezoid(lambda_min, lambda_max, cfg.nc_up);
  rule.symmetrized = op.is_real_symmetric();
  const DirectFilter direct(op, solve_shifts(rule));
  return run_loop(op, lambda_min, lambda_max, cfg, &direct);
}

EigenResult ifeast_solve(const HermitianOperator& op, double lambda_min, double lambda_max,
                         const IFEASTConfig& cfg) {
  if (cfg.solver == SolverKind::direct) return feast_direct(op, lambda_min, lambda_max, cfg);
  return run_loop(op, lambda_min, lambda_max, cfg, nullptr);
}

}  // namespace ifeast
