#include "ifeast/shifted_krylov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ifeast/errors.hpp"
#include "ifeast/linalg.hpp"
#include "ifeast/parallel.hpp"

namespace ifeast {

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::minres: return "minres";
    case SolverKind::fom: return "fom";
    case SolverKind::gmres: return "gmres";
    case SolverKind::direct: return "direct";
  }
  return "unknown";
}

SolverKind solver_kind_from_string(std::string_view name) {
  if (name == "minres") return SolverKind::minres;
  if (name == "fom") return SolverKind::fom;
  if (name == "gmres") return SolverKind::gmres;
  if (name == "direct") return SolverKind::direct;
  throw Error("shifted-krylov", "unknown solver kind '" + std::string(name) + "'");
}

std::size_t ShiftedSolveReport::max_iterations() const {
  return iterations.empty() ? 0 : *std::max_element(iterations.begin(), iterations.end());
}

std::size_t ShiftedSolveReport::max_iterations_for_shift(std::size_t k) const {
  std::size_t m = 0;
  for (std::size_t j = 0; j < column_count; ++j) m = std::max(m, iterations[lane(k, j)]);
  return m;
}

double ShiftedSolveReport::max_residual() const {
  return residual_norms.empty() ? 0.0
                                : *std::max_element(residual_norms.begin(), residual_norms.end());
}

namespace {

struct Givens {
  double c = 1.0;
  Complex s = 0.0;
};

// Rotation G = [c, s; -conj(s), c] with G [a; b] = [r; 0].
Givens make_givens(Complex a, Complex b, Complex& r) {
  if (b == Complex{}) {
    r = a;
    return {1.0, 0.0};
  }
  if (a == Complex{}) {
    r = b;
    return {0.0, 1.0};
  }
  const double abs_a = std::abs(a);
  const double rho = std::hypot(abs_a, std::abs(b));
  const Complex phase = a / abs_a;
  r = phase * rho;
  return {abs_a / rho, phase * std::conj(b) / rho};
}

void apply_givens(const Givens& g, Complex& top, Complex& bottom) {
  const Complex t = g.c * top + g.s * bottom;
  bottom = -std::conj(g.s) * top + g.c * bottom;
  top = t;
}

struct LaneResult {
  std::size_t iterations = 0;
  double residual = 1.0;  // relative to the unit rhs
  bool converged = false;
};

struct Prepared {
  std::size_t n = 0;
  std::size_t columns = 0;
  std::size_t max_inner = 0;
  bool fixed_steps = false;
  std::vector<double> rhs_norms;
};

Prepared prepare(const ShiftedSolveRequest& req, std::string_view who) {
  if (req.rhs.rows() != req.op.size())
    throw std::invalid_argument(std::string(who) + ": rhs has " + std::to_string(req.rhs.rows()) +
                                " rows, operator dimension is " + std::to_string(req.op.size()));
  if (req.shifts.empty()) throw std::invalid_argument(std::string(who) + ": no shifts given");
  if (req.tol_abs < 0.0 || !std::isfinite(req.tol_abs))
    throw std::invalid_argument(std::string(who) + ": tolerance must be finite and nonnegative");
  Prepared p;
  p.n = req.op.size();
  p.columns = req.rhs.cols();
  p.max_inner = req.max_inner == 0 ? 10 * p.n : req.max_inner;
  p.fixed_steps = req.tol_abs == 0.0;
  p.rhs_norms.resize(p.columns);
  for (std::size_t j = 0; j < p.columns; ++j) p.rhs_norms[j] = column_norm(req.rhs, j);
  return p;
}

ShiftedSolveResult make_result(const ShiftedSolveRequest& req, const Prepared& p) {
  ShiftedSolveResult out;
  out.y.assign(req.shifts.size(), VectorBlock(p.n, p.columns));
  auto& r = out.report;
  r.shift_count = req.shifts.size();
  r.column_count = p.columns;
  const std::size_t lanes = r.shift_count * r.column_count;
  r.iterations.assign(lanes, 0);
  r.residual_norms.assign(lanes, 0.0);
  r.lane_converged.assign(lanes, 1);
  return out;
}

void finish_report(ShiftedSolveReport& r, std::uint64_t matvecs) {
  r.matvecs_total = matvecs;
  r.converged = std::all_of(r.lane_converged.begin(), r.lane_converged.end(),
                            [](char c) { return c != 0; });
  r.lane_iterations_total = 0;
  r.matvecs_sequential = 0;
  for (std::size_t it : r.iterations) {
    r.lane_iterations_total += it;
    r.matvecs_sequential = std::max<std::uint64_t>(r.matvecs_sequential, it);
  }
}

// A Krylov vector shorter than this fraction of ||A|| is treated as an
// invariant subspace (lucky breakdown).
constexpr double breakdown_ratio = 1e-14;

void record_lane(ShiftedSolveReport& r, std::size_t k, std::size_t j, const LaneResult& lane,
                 double rhs_norm) {
  const std::size_t idx = r.lane(k, j);
  r.iterations[idx] = lane.iterations;
  r.residual_norms[idx] = lane.residual * rhs_norm;
  r.lane_converged[idx] = lane.converged ? 1 : 0;
}

// Per-shift state of the shifted MINRES recurrence.
struct MinresShift {
  Complex z;
  std::vector<Complex> y, d_prev, d_prev2;
  Givens g1, g2;  // rotations of the previous two steps
  Complex t = 1.0;
  LaneResult lane;
  bool active = true;
};

// Runs one Lanczos recurrence for the unit vector b and advances every
// shift's minimal-residual iterate on it.
std::vector<MinresShift> minres_column(const HermitianOperator& op,
                                       std::span<const Complex> shifts,
                                       std::span<const Complex> b, double tol_rel,
                                       const Prepared& p) {
  const std::size_t n = p.n;
  std::vector<MinresShift> states(shifts.size());
  for (std::size_t k = 0; k < shifts.size(); ++k) {
    states[k].z = shifts[k];
    states[k].y.assign(n, 0.0);
    states[k].d_prev.assign(n, 0.0);
    states[k].d_prev2.assign(n, 0.0);
  }
  std::vector<Complex> v_prev(n, 0.0), v(b.begin(), b.end()), w(n), d_new(n);
  double beta = 0.0;
  const double breakdown = breakdown_ratio * op.norm_estimate();

  for (std::size_t step = 1; step <= p.max_inner; ++step) {
    op.apply(v, w);
    const double alpha = dot(v, w).real();
    for (std::size_t i = 0; i < n; ++i) w[i] -= alpha * v[i] + beta * v_prev[i];
    const double beta_next = norm2(w);

    bool any_active = false;
    for (auto& s : states) {
      if (!s.active) continue;
      // Column `step` of zI - T: (-beta, z - alpha, -beta_next) on rows step-1 .. step+1.
      Complex above2 = 0.0;
      Complex above = -beta;
      Complex diag = s.z - alpha;
      apply_givens(s.g2, above2, above);
      apply_givens(s.g1, above, diag);
      Complex r_diag;
      const Givens g = make_givens(diag, Complex{-beta_next}, r_diag);
      if (r_diag == Complex{})
        throw Error("shifted-krylov", "solve_shifted_minres: singular projected system at z = " +
                                          format_complex(s.z));
      const Complex tau = g.c * s.t;
      s.t = -std::conj(g.s) * s.t;

      for (std::size_t i = 0; i < n; ++i) {
        d_new[i] = (v[i] - above * s.d_prev[i] - above2 * s.d_prev2[i]) / r_diag;
        s.y[i] += tau * d_new[i];
      }
      std::swap(s.d_prev2, s.d_prev);
      std::swap(s.d_prev, d_new);
      s.g2 = s.g1;
      s.g1 = g;
      s.lane.iterations = step;
      s.lane.residual = std::abs(s.t);
      if (!p.fixed_steps && s.lane.residual <= tol_rel) {
        s.lane.converged = true;
        s.active = false;
      }
      any_active = any_active || s.active;
    }
    if (beta_next <= breakdown) {
      // Invariant subspace reached: every remaining residual is exactly zero.
      for (auto& s : states) {
        if (s.active) s.lane.converged = true;
        s.active = false;
      }
      break;
    }
    if (!any_active) break;
    for (std::size_t i = 0; i < n; ++i) {
      v_prev[i] = v[i];
      v[i] = w[i] / beta_next;
    }
    beta = beta_next;
  }
  if (p.fixed_steps)
    for (auto& s : states) s.lane.converged = true;
  return states;
}

// Restart-free GMRES for one (shift, column) lane on the unit vector b.
LaneResult gmres_lane(const HermitianOperator& op, Complex z, std::span<const Complex> b,
                      double tol_rel, const Prepared& p, std::span<Complex> y) {
  const std::size_t n = p.n;
  std::vector<std::vector<Complex>> basis;
  basis.emplace_back(b.begin(), b.end());
  std::vector<std::vector<Complex>> r_cols;  // rotated columns of zI - H
  std::vector<Givens> rotations;
  std::vector<Complex> g{1.0};
  std::vector<Complex> w(n);
  LaneResult lane;
  const double breakdown = breakdown_ratio * op.norm_estimate();

  for (std::size_t step = 0; step < p.max_inner; ++step) {
    op.apply(basis[step], w);
    std::vector<Complex> h(step + 2, 0.0);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i <= step; ++i) {
        const Complex c = dot(basis[i], w);
        h[i] += c;
        axpy(-c, basis[i], w);
      }
    }
    const double h_next = norm2(w);
    h[step + 1] = h_next;

    std::vector<Complex> col(step + 2);
    for (std::size_t i = 0; i < step + 2; ++i) col[i] = -h[i];
    col[step] += z;
    for (std::size_t i = 0; i < step; ++i) apply_givens(rotations[i], col[i], col[i + 1]);
    Complex r_diag;
    const Givens rot = make_givens(col[step], col[step + 1], r_diag);
    col[step] = r_diag;
    col.pop_back();
    rotations.push_back(rot);
    r_cols.push_back(std::move(col));
    g.push_back(-std::conj(rot.s) * g[step]);
    g[step] = rot.c * g[step];

    lane.iterations = step + 1;
    lane.residual = std::abs(g[step + 1]);
    const bool done = (!p.fixed_steps && lane.residual <= tol_rel) || h_next <= breakdown ||
                      step + 1 == p.max_inner;
    if (done) {
      lane.converged = p.fixed_steps || lane.residual <= tol_rel || h_next <= breakdown;
      break;
    }
    basis.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) basis.back()[i] = w[i] / h_next;
  }

  const std::size_t k = lane.iterations;
  std::vector<Complex> c(k);
  for (std::size_t i = k; i-- > 0;) {
    Complex sum = g[i];
    for (std::size_t t = i + 1; t < k; ++t) sum -= r_cols[t][i] * c[t];
    if (r_cols[i][i] == Complex{})
      throw Error("shifted-krylov",
                  "solve_shifted_gmres: singular projected system at z = " + format_complex(z));
    c[i] = sum / r_cols[i][i];
  }
  for (std::size_t i = 0; i < k; ++i) axpy(c[i], basis[i], y);
  return lane;
}

VectorBlock unit_columns(const VectorBlock& x, const std::vector<double>& norms) {
  VectorBlock b = x;
  for (std::size_t j = 0; j < b.cols(); ++j)
    if (norms[j] > 0.0) scale(1.0 / norms[j], b.col(j));
  return b;
}

}  // namespace

ShiftedSolveResult solve_shifted_minres(const ShiftedSolveRequest& req) {
  const Prepared p = prepare(req, "solve_shifted_minres");
  ShiftedSolveResult out = make_result(req, p);
  const std::uint64_t start = req.op.matvec_count();
  const VectorBlock b = unit_columns(req.rhs, p.rhs_norms);

  parallel_for(p.columns, req.threads, [&](std::size_t j) {
    if (p.rhs_norms[j] == 0.0) {
      for (std::size_t k = 0; k < req.shifts.size(); ++k)
        record_lane(out.report, k, j, {0, 0.0, true}, 0.0);
      return;
    }
    const double tol_rel = req.tol_abs / p.rhs_norms[j];
    auto states = minres_column(req.op, req.shifts, b.col(j), tol_rel, p);
    for (std::size_t k = 0; k < states.size(); ++k) {
      auto yk = out.y[k].col(j);
      for (std::size_t i = 0; i < p.n; ++i) yk[i] = p.rhs_norms[j] * states[k].y[i];
      record_lane(out.report, k, j, states[k].lane, p.rhs_norms[j]);
    }
  });
  finish_report(out.report, req.op.matvec_count() - start);
  return out;
}

ShiftedSolveResult solve_shifted_gmres(const ShiftedSolveRequest& req) {
  const Prepared p = prepare(req, "solve_shifted_gmres");
  ShiftedSolveResult out = make_result(req, p);
  const std::uint64_t start = req.op.matvec_count();
  const VectorBlock b = unit_columns(req.rhs, p.rhs_norms);
  const std::size_t shifts = req.shifts.size();

  parallel_for(shifts * p.columns, req.threads, [&](std::size_t lane_idx) {
    const std::size_t k = lane_idx / p.columns;
    const std::size_t j = lane_idx % p.columns;
    if (p.rhs_norms[j] == 0.0) {
      record_lane(out.report, k, j, {0, 0.0, true}, 0.0);
      return;
    }
    auto yk = out.y[k].col(j);
    const LaneResult lane =
        gmres_lane(req.op, req.shifts[k], b.col(j), req.tol_abs / p.rhs_norms[j], p, yk);
    scale(p.rhs_norms[j], yk);
    record_lane(out.report, k, j, lane, p.rhs_norms[j]);
  });
  finish_report(out.report, req.op.matvec_count() - start);
  return out;
}

ShiftedSolveResult solve_shifted_fom(const ShiftedSolveRequest& req) {
  const Prepared p = prepare(req, "solve_shifted_fom");
  ShiftedSolveResult out = make_result(req, p);
  const std::uint64_t start = req.op.matvec_count();
  const VectorBlock b = unit_columns(req.rhs, p.rhs_norms);
  const std::size_t shifts = req.shifts.size();
  const std::size_t m = p.columns;

  struct FomLane {
    std::vector<Complex> coeff;  // Galerkin coefficients in the block basis
    LaneResult lane;
    bool frozen = false;
  };
  std::vector<FomLane> lanes(shifts * m);

  Orthonormalized first = orthonormalize(b);
  if (first.rank == 0) {
    for (std::size_t k = 0; k < shifts; ++k)
      for (std::size_t j = 0; j < m; ++j) record_lane(out.report, k, j, {0, 0.0, true}, 0.0);
    finish_report(out.report, req.op.matvec_count() - start);
    return out;
  }
  const DenseMatrix r0 = adjoint_multiply(first.q, b);

  std::vector<VectorBlock> basis{std::move(first.q)};
  std::vector<std::size_t> offsets{0};
  // h_cols[s][i] = H_{i,s}, i = 0..s+1.
  std::vector<std::vector<DenseMatrix>> h_cols;

  for (std::size_t s = 0; s < p.max_inner; ++s) {
    VectorBlock w = req.op.apply(basis[s]);
    std::vector<double> applied_norms(w.cols());
    for (std::size_t j = 0; j < w.cols(); ++j) applied_norms[j] = column_norm(w, j);

    std::vector<DenseMatrix> h(s + 2);
    for (std::size_t i = 0; i <= s; ++i) h[i] = DenseMatrix(basis[i].cols(), w.cols());
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i <= s; ++i) {
        const DenseMatrix c = adjoint_multiply(basis[i], w);
        w = subtract(w, multiply(basis[i], c));
        auto hd = h[i].data();
        const auto cd = c.data();
        for (std::size_t t = 0; t < hd.size(); ++t) hd[t] += cd[t];
      }
    }
    // Deflate directions that vanished against the basis.
    for (std::size_t j = 0; j < w.cols(); ++j)
      if (column_norm(w, j) <= 1e-12 * applied_norms[j])
        std::fill(w.col(j).begin(), w.col(j).end(), Complex{});
    Orthonormalized next = orthonormalize(w);
    h[s + 1] = adjoint_multiply(next.q, w);
    h_cols.push_back(std::move(h));

    const std::size_t dim = offsets.back() + basis[s].cols();
    DenseMatrix hd(dim, dim);
    double h_norm = 0.0;
    for (std::size_t t = 0; t <= s; ++t) {
      for (std::size_t i = 0; i <= std::min(t + 1, s); ++i) {
        const DenseMatrix& blk = h_cols[t][i];
        for (std::size_t cc = 0; cc < blk.cols(); ++cc)
          for (std::size_t rr = 0; rr < blk.rows(); ++rr)
            hd(offsets[i] + rr, offsets[t] + cc) = blk(rr, cc);
      }
    }
    h_norm = frobenius_norm(hd);
    DenseMatrix rhs(dim, m);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t i = 0; i < r0.rows(); ++i) rhs(i, j) = r0(i, j);
    const DenseMatrix& coupling = h_cols[s][s + 1];  // rank(next) x p_s
    const std::size_t last_offset = offsets[s];

    parallel_for(shifts, req.threads, [&](std::size_t k) {
      DenseMatrix c;
      try {
        c = ShiftedFactorization(hd, req.shifts[k], h_norm).solve(rhs);
      } catch (const PoleError&) {
        return;  // lanes keep the previous step's iterate
      }
      for (std::size_t j = 0; j < m; ++j) {
        FomLane& lane = lanes[k * m + j];
        if (lane.frozen) continue;
        double res = 0.0;
        for (std::size_t rr = 0; rr < coupling.rows(); ++rr) {
          Complex acc = 0.0;
          for (std::size_t cc = 0; cc < coupling.cols(); ++cc)
            acc += coupling(rr, cc) * c(last_offset + cc, j);
          res += std::norm(acc);
        }
        res = std::sqrt(res);
        lane.coeff.assign(c.col(j).begin(), c.col(j).end());
        lane.lane.iterations = s + 1;
        lane.lane.residual = res;
        const double tol_rel = p.rhs_norms[j] > 0.0 ? req.tol_abs / p.rhs_norms[j] : 0.0;
        if (!p.fixed_steps && res <= tol_rel) {
          lane.lane.converged = true;
          lane.frozen = true;
        }
      }
    });

    const bool all_frozen =
        std::all_of(lanes.begin(), lanes.end(), [](const FomLane& l) { return l.frozen; });
    if (all_frozen) break;
    if (next.rank == 0) {
      for (auto& l : lanes)
        if (!l.frozen && l.lane.iterations == s + 1) l.lane.converged = true;
      break;
    }
    offsets.push_back(dim);
    basis.push_back(std::move(next.q));
  }

  parallel_for(shifts * m, req.threads, [&](std::size_t idx) {
    const std::size_t k = idx / m;
    const std::size_t j = idx % m;
    FomLane& lane = lanes[idx];
    if (p.fixed_steps && !lane.coeff.empty()) lane.lane.converged = true;
    auto yk = out.y[k].col(j);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < basis.size() && pos < lane.coeff.size(); ++i) {
      for (std::size_t cc = 0; cc < basis[i].cols() && pos < lane.coeff.size(); ++cc, ++pos)
        axpy(lane.coeff[pos], basis[i].col(cc), yk);
    }
    scale(p.rhs_norms[j], yk);
    record_lane(out.report, k, j, lane.lane, p.rhs_norms[j]);
  });
  finish_report(out.report, req.op.matvec_count() - start);
  // One block step is a single sequential matvec round.
  out.report.matvecs_sequential = out.report.max_iterations();
  return out;
}

ShiftedSolveResult solve_shifted(SolverKind kind, const ShiftedSolveRequest& req) {
  switch (kind) {
    case SolverKind::minres: return solve_shifted_minres(req);
    case SolverKind::fom: return solve_shifted_fom(req);
    case SolverKind::gmres: return solve_shifted_gmres(req);
    case SolverKind::direct: break;
  }
  throw Error("shifted-krylov", "solve_shifted: the direct variant has no Krylov solver");
}

}  // namespace ifeast
