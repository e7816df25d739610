#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ifeast/analysis.hpp"
#include "ifeast/errors.hpp"
#include "ifeast/feast.hpp"
#include "ifeast/generators.hpp"
#include "ifeast/linalg.hpp"
#include "test_support.hpp"

using namespace ifeast;
using namespace ifeast::testing;

namespace {

std::vector<double> one_to(std::size_t n) {
  std::vector<double> d(n);
  std::iota(d.begin(), d.end(), 1.0);
  return d;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("delta_value: one eigenvalue at the center") {
  // Every node is at distance r and sum |w_k| = r, so Delta = 1.
  for (std::size_t nc : {1u, 4u, 9u}) {
    const ContourRule rule = build_trapezoid(-2.0, 4.0, nc);
    CHECK(delta_value(rule, {rule.center}) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("delta_value: matches the resolvent norms of a diagonal matrix") {
  const std::vector<double> eig{-3.0, -0.4, 0.1, 0.9, 2.2, 5.0};
  const HermitianOperator op = make_diagonal(eig);
  const ContourRule rule = build_trapezoid(-1.0, 1.0, 4);
  double brute = 0.0;
  for (const auto& nw : full_nodes(rule)) {
    const DenseMatrix inv = dense_shifted_solve(op, nw.node, DenseMatrix::identity(6));
    double norm = 0.0;
    for (std::size_t i = 0; i < 6; ++i) norm = std::max(norm, std::abs(inv(i, i)));
    brute += std::abs(nw.weight) * norm;
  }
  CHECK(delta_value(rule, eig) == doctest::Approx(brute).epsilon(1e-13));
}

TEST_CASE("delta_value: grows as an eigenvalue approaches the contour") {
  const ContourRule rule = build_trapezoid(-1.0, 1.0, 4);
  double prev = 0.0;
  for (double d : {0.5, 0.2, 0.1, 0.05, 0.01}) {
    const double v = delta_value(rule, {0.0, 1.0 + d});
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS(delta_value(rule, {}));
}

TEST_CASE("filter_spectrum: descending magnitude, stable ties") {
  const ContourRule rule = build_trapezoid(-1.0, 1.0, 4);
  const FilterSpectrum fs = filter_spectrum(rule, {-3.0, 0.5, -0.5, 0.0, 3.0});
  REQUIRE(fs.order.size() == 5);
  CHECK(fs.order[0] == 3);
  CHECK(fs.order[1] == 1);  // |rho(0.5)| == |rho(-0.5)|, input order kept
  CHECK(fs.order[2] == 2);
  CHECK(fs.order[3] == 0);
  CHECK(fs.order[4] == 4);
  for (std::size_t i = 1; i < 5; ++i) CHECK(std::abs(fs.gammas[i - 1]) >= std::abs(fs.gammas[i]));
  CHECK(std::abs(fs.gammas[0] - 1.0) < 1e-13);
}

TEST_CASE("predicted_rate: exact filter and inexact correction") {
  const auto eig = one_to(10);
  const ContourRule rule = build_trapezoid(0.5, 3.5, 4);
  const FilterSpectrum fs = filter_spectrum(rule, eig);
  const double exact = predicted_rate(1, 3, 0.0, rule, eig);
  CHECK(exact == doctest::Approx(std::abs(fs.gammas[3]) / std::abs(fs.gammas[0])));
  const double delta = delta_value(rule, eig);
  const double inexact = predicted_rate(2, 3, 0.1, rule, eig);
  CHECK(inexact ==
        doctest::Approx((std::abs(fs.gammas[3]) + 0.1 * delta) / std::abs(fs.gammas[1])));
  CHECK(exact < 1.0);
  CHECK_THROWS(predicted_rate(0, 3, 0.0, rule, eig));
  CHECK_THROWS(predicted_rate(4, 3, 0.0, rule, eig));
  CHECK_THROWS(predicted_rate(1, 10, 0.0, rule, eig));
}

TEST_CASE("oblique_error: exact subspace gives zero error") {
  const DenseMatrix x1 = random_block(8, 3, 1);
  const VectorBlock q1 = orthonormalize(x1).q;
  DenseMatrix mix(3, 3);
  mix(0, 0) = 2.0;
  mix(1, 0) = 1.0;
  mix(1, 1) = 0.5;
  mix(2, 2) = -3.0;
  mix(0, 2) = 0.25;
  const VectorBlock q = multiply(q1, mix);
  for (std::size_t j = 0; j < 3; ++j) {
    const ObliqueError o = oblique_error(q, q1, j);
    CHECK(o.w_norm < 1e-13);
  }
}

TEST_CASE("oblique_error: components along X1 are exact") {
  const VectorBlock x1 = orthonormalize(random_block(10, 2, 2)).q;
  const VectorBlock q = random_block(10, 2, 3);
  const ObliqueError o = oblique_error(q, x1, 1);
  VectorBlock w(10, 1);
  for (std::size_t i = 0; i < 10; ++i) w(i, 0) = o.q[i];
  const DenseMatrix proj = adjoint_multiply(x1, w);
  CHECK(std::abs(proj(0, 0)) < 1e-13);
  CHECK(std::abs(proj(1, 0) - 1.0) < 1e-13);
  std::vector<Complex> diff = o.q;
  axpy(-1.0, x1.col(1), diff);
  CHECK(o.w_norm == doctest::Approx(norm2(diff)));
}

TEST_CASE("oblique_error: singular projection") {
  VectorBlock x1(4, 2);
  x1(0, 0) = 1.0;
  x1(1, 1) = 1.0;
  VectorBlock q(4, 2);
  q(0, 0) = 1.0;
  q(2, 1) = 1.0;
  CHECK_THROWS_AS(oblique_error(q, x1, 0), Error);
  CHECK_THROWS(oblique_error(q, x1, 2));
}

TEST_CASE("verify_bound: exact filter on diag(1..10)") {
  const HermitianOperator op = make_diagonal(one_to(10));
  BoundConfig cfg;
  cfg.m0 = 5;
  cfg.nc_up = 2;
  cfg.alpha = 0.0;
  cfg.n_iters = 6;
  const BoundReport rep = verify_bound(op, 0.5, 3.5, cfg);
  CHECK(rep.delta > 0.0);
  CHECK(rep.gamma_next > 0.0);
  CHECK(rep.flagged_iterations > 0);
  CHECK(rep.all_hold);
  for (const auto& e : rep.entries) {
    CHECK(e.holds);
    CHECK(e.alpha_j < 1e-9);  // measured residuals of the dense solves
    if (!e.skipped) CHECK(e.observed <= e.predicted + bound_slack);
  }
}

TEST_CASE("verify_bound: inexact solves, diagonal and random") {
  BoundConfig cfg;
  cfg.m0 = 5;
  cfg.nc_up = 2;
  cfg.alpha = 0.1;
  cfg.n_iters = 5;
  {
    const HermitianOperator op = make_diagonal(one_to(10));
    const BoundReport rep = verify_bound(op, 0.5, 3.5, cfg);
    CHECK(rep.all_hold);
    CHECK(rep.flagged_iterations > 0);
  }
  {
    const DenseMatrix a = random_symmetric_dense(60, 13);
    const HermitianOperator op = operator_from_dense(a);
    const EigenDecomposition e = dense_eig(a);
    cfg.m0 = 8;
    cfg.nc_up = 4;
    cfg.alpha = 0.01;
    const BoundReport rep =
        verify_bound(op, 0.5 * (e.values[9] + e.values[10]), 0.5 * (e.values[14] + e.values[15]), cfg);
    CHECK(rep.all_hold);
    for (const auto& en : rep.entries)
      if (!en.skipped) CHECK(en.observed <= en.predicted + bound_slack);
  }
}

TEST_CASE("verify_bound: argument checks") {
  const HermitianOperator op = make_diagonal(one_to(6));
  BoundConfig cfg;
  cfg.m0 = 6;
  CHECK_THROWS_AS(verify_bound(op, 0.5, 3.5, cfg), Error);
  cfg.m0 = 0;
  CHECK_THROWS_AS(verify_bound(op, 0.5, 3.5, cfg), Error);
}

TEST_CASE("block_arnoldi: orthonormal basis, Hermitian projection, deflation") {
  const DenseMatrix a = random_symmetric_dense(40, 19);
  const HermitianOperator op = operator_from_dense(a);
  const VectorBlock x0 = random_block(40, 3, 20);
  const BlockKrylov kr = block_arnoldi(op, x0, 5);
  CHECK(kr.v.cols() == 15);
  CHECK(orthonormality_defect(kr.v) < 1e-12);
  CHECK(hermitian_defect(kr.h) == 0.0);
  CHECK(max_diff(kr.h, adjoint_multiply(kr.v, op.apply(kr.v))) < 1e-12);
  REQUIRE(kr.blocks.size() == 5);
  // Block tridiagonal structure: H_{i,s} vanishes for i > s + 1.
  for (std::size_t s = 0; s < kr.blocks.size(); ++s)
    for (std::size_t i = s + 2; i < kr.blocks[s].size(); ++i) CHECK(max_abs(kr.blocks[s][i]) < 1e-10);

  const HermitianOperator d = make_diagonal({1.0, 2.0, 3.0, 4.0});
  VectorBlock e(4, 2);
  e(0, 0) = 1.0;
  e(1, 1) = 1.0;
  const BlockKrylov small = block_arnoldi(d, e, 3);
  CHECK(small.v.cols() == 2);  // span{e1, e2} is invariant
  CHECK_THROWS(block_arnoldi(d, VectorBlock(4, 1), 2));
  CHECK_THROWS(block_arnoldi(d, e, 0));
}

TEST_CASE("restarted_block_arnoldi: full Krylov space is exact") {
  const auto eig = one_to(12);
  const HermitianOperator op = make_diagonal(eig);
  const ContourRule rule = build_trapezoid(2.5, 5.3, 4);
  const VectorBlock x0 = random_block(12, 4, 5);
  const ArnoldiRestartResult r = restarted_block_arnoldi(op, x0, 3, rule, 1);
  REQUIRE(r.values.size() == 4);
  CHECK(r.history.size() == 2);
  std::vector<double> kept = r.values;
  std::sort(kept.begin(), kept.end());
  CHECK(std::abs(kept[0] - 2.0) < 1e-10);
  // Three inside, then 2 (|u| = 1.36) ahead of 6 (|u| = 1.5).
  CHECK(std::abs(kept[1] - 3.0) < 1e-10);
  CHECK(std::abs(kept[2] - 4.0) < 1e-10);
  CHECK(std::abs(kept[3] - 5.0) < 1e-10);
  for (std::size_t t = 0; t < 4; ++t) CHECK(r.residuals[t] < 1e-10);
  CHECK(r.history.back().inside_count == 3);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("fom_equivalence: Galerkin FOM equals the filtered Arnoldi projection") {
  const DenseMatrix a = random_symmetric_dense(200, 43);
  const HermitianOperator op = operator_from_dense(a);
  const ContourRule rule = build_trapezoid(-3.0, 3.0, 4);
  const VectorBlock x0 = initial_block(200, 6, 44);
  for (std::size_t k : {1u, 10u}) {
    CAPTURE(k);
    const EquivalenceReport rep = fom_equivalence(op, x0, k, rule);
    CHECK(rep.deviation < 1e-12);
    CHECK(fom_equivalence_check(op, x0, k, rule) == rep.deviation);
  }
  const DenseMatrix h = random_hermitian_dense(80, 45);
  const HermitianOperator hop = operator_from_dense(h);
  CHECK(fom_equivalence_check(hop, random_block(80, 3, 46, true), 6, rule) < 1e-12);
}

TEST_CASE("max_principal_sine") {
  VectorBlock a(3, 1), b(3, 1);
  a(0, 0) = 1.0;
  b(0, 0) = 1.0;
  b(1, 0) = 1.0;
  CHECK(max_principal_sine(a, b) == doctest::Approx(std::sqrt(0.5)));
  CHECK(max_principal_sine(a, a) < 1e-15);
  const VectorBlock r = random_block(10, 3, 7);
  CHECK(max_principal_sine(r, multiply(r, DenseMatrix::identity(3))) < 1e-14);
}

}  // TEST_SUITE
