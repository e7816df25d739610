#include "ifeast/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ifeast/errors.hpp"
#include "ifeast/feast.hpp"
#include "ifeast/linalg.hpp"

namespace ifeast {

double delta_value(const ContourRule& rule, const std::vector<double>& eigvals) {
  if (eigvals.empty()) throw std::invalid_argument("delta_value: empty spectrum");
  double delta = 0.0;
  for (const auto& nw : full_nodes(rule)) {
    double dist = std::numeric_limits<double>::infinity();
    for (double l : eigvals) dist = std::min(dist, std::abs(nw.node - l));
    if (dist < 1e-14 * std::max(1.0, std::abs(nw.node)))
      throw PoleError("analysis", "delta_value: node " + format_complex(nw.node) +
                                      " coincides with an eigenvalue", nw.node);
    delta += std::abs(nw.weight) / dist;
  }
  return delta;
}

FilterSpectrum filter_spectrum(const ContourRule& rule, const std::vector<double>& eigvals) {
  std::vector<Complex> values(eigvals.size());
  for (std::size_t i = 0; i < eigvals.size(); ++i) values[i] = filter_value(rule, eigvals[i]);
  FilterSpectrum fs;
  fs.order.resize(eigvals.size());
  std::iota(fs.order.begin(), fs.order.end(), std::size_t{0});
  std::stable_sort(fs.order.begin(), fs.order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });
  for (std::size_t i : fs.order) fs.gammas.push_back(values[i]);
  return fs;
}

double predicted_rate(std::size_t j, std::size_t m0, double alpha_j, const ContourRule& rule,
                      const std::vector<double>& eigvals) {
  if (j < 1 || j > m0 || m0 >= eigvals.size())
    throw std::invalid_argument("predicted_rate: need 1 <= j <= m0 < n");
  const FilterSpectrum fs = filter_spectrum(rule, eigvals);
  const double gj = std::abs(fs.gammas[j - 1]);
  if (gj == 0.0) return std::numeric_limits<double>::infinity();
  const double delta = alpha_j == 0.0 ? 0.0 : delta_value(rule, eigvals);
  return (std::abs(fs.gammas[m0]) + alpha_j * delta) / gj;
}

ObliqueError oblique_error(const VectorBlock& q, const VectorBlock& x1, std::size_t j) {
  if (q.rows() != x1.rows() || q.cols() != x1.cols() || j >= x1.cols())
    throw std::invalid_argument("oblique_error: Q and X1 must both be n x m0 and j < m0");
  const std::size_t m = q.cols();
  // (X1^H Q) c = e_j, factored as 0 * I - (-(X1^H Q)).
  DenseMatrix g = adjoint_multiply(x1, q);
  for (auto& e : g.data()) e = -e;
  DenseMatrix e_j(m, 1);
  e_j(j, 0) = 1.0;
  DenseMatrix c;
  try {
    c = ShiftedFactorization(g, 0.0, max_abs(g)).solve(e_j);
  } catch (const PoleError&) {
    throw Error("analysis", "oblique_error: X1^H Q is singular; the subspace lost wanted direction " +
                                std::to_string(j));
  }
  ObliqueError out;
  out.coeffs.assign(c.col(0).begin(), c.col(0).end());
  const DenseMatrix qc = multiply(q, c);
  out.q.assign(qc.col(0).begin(), qc.col(0).end());
  std::vector<Complex> w(out.q);
  axpy(-1.0, x1.col(j), w);
  out.w_norm = norm2(w);
  return out;
}

namespace {

std::vector<Complex> times(const VectorBlock& a, std::span<const Complex> c) {
  std::vector<Complex> out(a.rows());
  for (std::size_t t = 0; t < c.size(); ++t) axpy(c[t], a.col(t), out);
  return out;
}

}  // namespace

BoundReport verify_bound(const HermitianOperator& op, double lambda_min, double lambda_max,
                         const BoundConfig& cfg) {
  const std::size_t n = op.size();
  if (n > verify_bound_limit)
    throw Error("analysis", "verify_bound: n = " + std::to_string(n) + " exceeds " +
                                std::to_string(verify_bound_limit));
  if (cfg.m0 == 0 || cfg.m0 >= n) throw Error("analysis", "verify_bound: need 0 < m0 < n");

  const ContourRule rule = build_trapezoid(lambda_min, lambda_max, cfg.nc_up);
  const EigenDecomposition oracle = dense_eig(op);
  const FilterSpectrum fs = filter_spectrum(rule, oracle.values);

  BoundReport report;
  report.delta = delta_value(rule, oracle.values);
  report.gamma_next = std::abs(fs.gammas[cfg.m0]);
  VectorBlock x1(n, cfg.m0);
  for (std::size_t j = 0; j < cfg.m0; ++j) x1.set_columns(j, oracle.vectors.columns(fs.order[j], 1));

  std::unique_ptr<DirectFilter> direct;
  if (cfg.alpha == 0.0) {
    ContourRule r = rule;
    r.symmetrized = op.is_real_symmetric();
    direct = std::make_unique<DirectFilter>(op, solve_shifts(r));
  }

  VectorBlock x = initial_block(n, cfg.m0, cfg.seed);
  double rf = 1.0;
  for (std::size_t iter = 1; iter <= cfg.n_iters; ++iter) {
    const double tol = cfg.alpha * std::min(rf, 1.0);
    const FilterStep step = apply_filter(op, rule, x, cfg.solver, tol, cfg.max_inner, 1,
                                         direct.get());
    // True residuals R_k = X - (z_k I - A) Y_k of the solves just made.
    std::vector<VectorBlock> residual;
    for (std::size_t k = 0; k < step.shifts.size(); ++k) {
      VectorBlock r = op.apply(step.y[k]);
      auto rd = r.data();
      const auto yd = step.y[k].data();
      const auto xd = x.data();
      for (std::size_t i = 0; i < rd.size(); ++i) rd[i] = xd[i] - (step.shifts[k] * yd[i] - rd[i]);
      residual.push_back(std::move(r));
    }

    RitzResult rr = rayleigh_ritz(op, step.q, cfg.seed + iter);
    bool flagged = false;
    for (std::size_t j = 0; j < cfg.m0; ++j) {
      BoundEntry e;
      e.iter = iter;
      e.j = j + 1;
      e.lambda = oracle.values[fs.order[j]];
      e.gamma_abs = std::abs(fs.gammas[j]);
      ObliqueError now;
      try {
        now = oblique_error(x, x1, j);
      } catch (const Error& err) {
        e.skipped = true;
        e.note = err.what();
        report.entries.push_back(e);
        continue;
      }
      e.w_norm = now.w_norm;

      double eps = 0.0;
      std::vector<Complex> conj_c(now.coeffs.size());
      std::transform(now.coeffs.begin(), now.coeffs.end(), conj_c.begin(),
                     [](Complex v) { return std::conj(v); });
      for (const auto& r : residual) {
        eps = std::max(eps, norm2(times(r, now.coeffs)));
        if (step.rule.symmetrized) eps = std::max(eps, norm2(times(r, conj_c)));
      }
      e.epsilon = eps;

      std::vector<Complex> w_next = times(step.q, now.coeffs);
      scale(1.0 / fs.gammas[j], w_next);
      axpy(-1.0, x1.col(j), w_next);
      e.w_next_norm = norm2(w_next);
      try {
        e.w_next_oblique = oblique_error(rr.vectors, x1, j).w_norm;
      } catch (const Error&) {
        e.w_next_oblique = std::numeric_limits<double>::infinity();
      }

      if (e.w_norm < cfg.resolution) {
        e.skipped = true;
        e.note = "error below resolution";
        report.entries.push_back(e);
        continue;
      }
      e.alpha_j = eps / e.w_norm;
      e.predicted = (report.gamma_next + e.alpha_j * report.delta) / e.gamma_abs;
      e.observed = e.w_next_norm / e.w_norm;
      e.condition = e.alpha_j * report.delta < e.gamma_abs - report.gamma_next;
      e.holds = e.observed <= e.predicted + bound_slack;
      if (e.condition) {
        flagged = true;
        report.all_hold = report.all_hold && e.holds;
      }
      report.entries.push_back(e);
    }
    if (flagged) ++report.flagged_iterations;

    x = std::move(rr.vectors);
    rf = compute_residual(op, x, rr.values, lambda_min, lambda_max).rf;
  }
  return report;
}

BlockKrylov block_arnoldi(const HermitianOperator& op, const VectorBlock& x0, std::size_t k) {
  if (k == 0) throw std::invalid_argument("block_arnoldi: k must be positive");
  if (x0.rows() != op.size()) throw std::invalid_argument("block_arnoldi: X0 has wrong row count");
  VectorBlock b = x0;
  normalize_columns(b);
  std::vector<VectorBlock> basis;
  Orthonormalized first = orthonormalize(b);
  if (first.rank == 0) throw Error("analysis", "block_arnoldi: X0 is zero");
  basis.push_back(std::move(first.q));

  BlockKrylov out;
  for (std::size_t s = 0; s + 1 < k; ++s) {
    VectorBlock w = op.apply(basis[s]);
    std::vector<double> applied(w.cols());
    for (std::size_t j = 0; j < w.cols(); ++j) applied[j] = column_norm(w, j);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : basis) w = subtract(w, multiply(v, adjoint_multiply(v, w)));
    for (std::size_t j = 0; j < w.cols(); ++j)
      if (column_norm(w, j) <= 1e-12 * applied[j])
        std::fill(w.col(j).begin(), w.col(j).end(), Complex{});
    Orthonormalized next = orthonormalize(w);
    if (next.rank == 0) break;
    basis.push_back(std::move(next.q));
  }

  std::size_t dim = 0;
  for (const auto& v : basis) {
    out.block_sizes.push_back(v.cols());
    dim += v.cols();
  }
  out.v = VectorBlock(op.size(), dim);
  std::size_t at = 0;
  for (const auto& v : basis) {
    out.v.set_columns(at, v);
    at += v.cols();
  }
  out.h = adjoint_multiply(out.v, op.apply(out.v));
  hermitianize(out.h);

  std::vector<std::size_t> offsets{0};
  for (std::size_t s = 0; s + 1 < basis.size(); ++s) offsets.push_back(offsets[s] + basis[s].cols());
  out.blocks.resize(basis.size());
  for (std::size_t s = 0; s < basis.size(); ++s)
    for (std::size_t i = 0; i < basis.size(); ++i) {
      DenseMatrix blk(basis[i].cols(), basis[s].cols());
      for (std::size_t c = 0; c < blk.cols(); ++c)
        for (std::size_t r = 0; r < blk.rows(); ++r) blk(r, c) = out.h(offsets[i] + r, offsets[s] + c);
      out.blocks[s].push_back(std::move(blk));
    }
  return out;
}

ArnoldiRestartResult restarted_block_arnoldi(const HermitianOperator& op, const VectorBlock& x0,
                                             std::size_t k, const ContourRule& rule,
                                             std::size_t n_restarts) {
  const std::size_t m0 = x0.cols();
  if (k * m0 > op.size()) throw std::invalid_argument("restarted_block_arnoldi: k m0 exceeds n");
  ArnoldiRestartResult out;
  VectorBlock x = x0;
  for (std::size_t cycle = 0; cycle <= n_restarts; ++cycle) {
    const BlockKrylov kr = block_arnoldi(op, x, k);
    const EigenDecomposition e = dense_eig(kr.h);
    std::vector<Complex> rho(e.values.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = filter_value(rule, e.values[i]);
    std::vector<std::size_t> rank(e.values.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(rho[a]) > std::abs(rho[b]);
    });
    const std::size_t keep = std::min(m0, rank.size());
    rank.resize(keep);
    std::sort(rank.begin(), rank.end());

    RestartRecord rec;
    rec.restart = cycle;
    DenseMatrix w(e.vectors.rows(), keep);
    for (std::size_t t = 0; t < keep; ++t) w.set_columns(t, e.vectors.columns(rank[t], 1));
    VectorBlock ritz = multiply(kr.v, w);
    normalize_columns(ritz);
    const VectorBlock aritz = op.apply(ritz);
    out.values.clear();
    out.residuals.clear();
    for (std::size_t t = 0; t < keep; ++t) {
      const double theta = e.values[rank[t]];
      out.values.push_back(theta);
      std::vector<Complex> r(aritz.col(t).begin(), aritz.col(t).end());
      axpy(-theta, ritz.col(t), r);
      out.residuals.push_back(norm2(r));
      rec.ritz_values.push_back(theta);
      if (inside_interval(theta, rule.lambda_min(), rule.lambda_max())) {
        ++rec.inside_count;
        rec.max_inside_residual = std::max(rec.max_inside_residual, out.residuals.back());
      }
    }
    if (rec.inside_count < m0)
      out.warnings.push_back("cycle " + std::to_string(cycle) + ": " +
                             std::to_string(rec.inside_count) +
                             " Ritz values inside the contour; padded with the nearest ones");
    out.history.push_back(std::move(rec));
    out.vectors = ritz;
    x = orthonormalize(ritz).q;
    if (x.cols() < m0) x = ritz;
  }
  return out;
}

EquivalenceReport fom_equivalence(const HermitianOperator& op, const VectorBlock& x0,
                                  std::size_t k, const ContourRule& rule_in) {
  ContourRule rule = rule_in;
  rule.symmetrized = op.is_real_symmetric() && x0.is_real();
  const std::vector<Complex> shifts = solve_shifts(rule);

  EquivalenceReport out;
  ShiftedSolveRequest req{op, shifts, x0, 0.0, k, 1};
  const ShiftedSolveResult fom = solve_shifted_fom(req);
  out.q_fom = accumulate_q(rule, fom.y);

  const BlockKrylov kr = block_arnoldi(op, x0, k);
  const EigenDecomposition e = dense_eig(kr.h);
  DenseMatrix filtered = e.vectors;
  for (std::size_t j = 0; j < filtered.cols(); ++j) {
    const Complex g = filter_value(rule, e.values[j]);
    scale(g, filtered.col(j));
  }
  const DenseMatrix rho_h = multiply(filtered, adjoint(e.vectors));
  out.q_arnoldi = multiply(kr.v, multiply(rho_h, adjoint_multiply(kr.v, x0)));

  const double denom = frobenius_norm(out.q_arnoldi);
  if (denom == 0.0) throw Error("analysis", "fom_equivalence_check: filtered block vanished");
  out.deviation = frobenius_norm(subtract(out.q_fom, out.q_arnoldi)) / denom;
  return out;
}

double fom_equivalence_check(const HermitianOperator& op, const VectorBlock& x0, std::size_t k,
                             const ContourRule& rule) {
  return fom_equivalence(op, x0, k, rule).deviation;
}

double max_principal_sine(const VectorBlock& a, const VectorBlock& b) {
  const VectorBlock ua = orthonormalize(a).q;
  const VectorBlock ub = orthonormalize(b).q;
  const VectorBlock m = subtract(ub, multiply(ua, adjoint_multiply(ua, ub)));
  DenseMatrix g = adjoint_multiply(m, m);
  hermitianize(g);
  const EigenDecomposition e = dense_eig(g);
  if (e.values.empty()) return 0.0;
  return std::sqrt(std::max(0.0, e.values.back()));
}

}  // namespace ifeast
