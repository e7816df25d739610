#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ifeast/contour.hpp"
#include "ifeast/errors.hpp"
#include "ifeast/generators.hpp"
#include "ifeast/linalg.hpp"
#include "ifeast/operator.hpp"
#include "test_support.hpp"

using namespace ifeast;
using namespace ifeast::testing;

TEST_SUITE("core-la") {

TEST_CASE("apply: identity and diagonal actions") {
  const HermitianOperator id = make_diagonal({1.0, 1.0, 1.0});
  const VectorBlock x = random_block(3, 2, 1, true);
  CHECK(id.apply(x) == x);

  const HermitianOperator d = make_diagonal({1.0, 2.0, 3.0});
  VectorBlock e2(3, 1);
  e2(1, 0) = 1.0;
  const VectorBlock y = d.apply(e2);
  CHECK(y(0, 0) == Complex{});
  CHECK(y(1, 0) == Complex{2.0});
  CHECK(y(2, 0) == Complex{});
}

TEST_CASE("apply: counter tracks columns exactly") {
  const HermitianOperator op = operator_from_dense(random_symmetric_dense(12, 3));
  CHECK(op.matvec_count() == 0);
  (void)op.apply(random_block(12, 5, 2));
  (void)op.apply(random_block(12, 3, 3));
  std::vector<Complex> x(12, 1.0), y(12);
  op.apply(x, y);
  CHECK(op.matvec_count() == 9);
  (void)op.to_dense();
  CHECK(op.matvec_count() == 9);
}

TEST_CASE("apply: dimension mismatch is rejected") {
  const HermitianOperator op = make_diagonal({1.0, 2.0, 3.0});
  CHECK_THROWS_AS((void)op.apply(random_block(4, 1, 1)), std::invalid_argument);
}

TEST_CASE("Hermitian contract and deterministic apply") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const DenseMatrix a = random_hermitian_dense(40, seed);
    const HermitianOperator op = operator_from_dense(a);
    const VectorBlock u = random_block(40, 1, seed + 10, true);
    const VectorBlock v = random_block(40, 1, seed + 20, true);
    const VectorBlock au = op.apply(u), av = op.apply(v);
    const double lhs = std::abs(dot(au.col(0), v.col(0)) - dot(u.col(0), av.col(0)));
    CHECK(lhs <= 1e-12 * op.norm_estimate() * norm2(u.col(0)) * norm2(v.col(0)));
    // The quadratic form of a Hermitian operator is real.
    CHECK(std::abs(dot(u.col(0), au.col(0)).imag()) <= 1e-12 * op.norm_estimate() * 40);
    CHECK(op.apply(u) == au);
  }
}

TEST_CASE("csr_from_triplets sums duplicates and sorts columns") {
  const std::vector<Triplet> t{{1, 1, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {0, 0, 1.0}, {1, 1, 3.0}};
  const CsrMatrix csr = csr_from_triplets(2, t);
  CHECK(csr.nnz() == 4);
  CHECK(csr.row_ptr == std::vector<std::size_t>{0, 2, 4});
  CHECK(csr.col_idx == std::vector<std::size_t>{0, 1, 0, 1});
  CHECK(csr.values[3] == Complex{5.0});
  const std::vector<Triplet> bad{{2, 0, 1.0}};
  CHECK_THROWS(csr_from_triplets(2, bad));
}

TEST_CASE("callback operator matches its sparse counterpart") {
  const DenseMatrix a = random_symmetric_dense(15, 9);
  const HermitianOperator sparse = operator_from_dense(a);
  const HermitianOperator cb(
      15, [&](std::span<const Complex> x, std::span<Complex> y) { sparse.apply(x, y); },
      Symmetry::real_symmetric);
  const VectorBlock x = random_block(15, 3, 4);
  CHECK(max_diff(cb.apply(x), sparse.apply(x)) == 0.0);
  CHECK(cb.norm_estimate() >= dense_eig(a).values.back() * 0.99);
  CHECK(cb.matvec_count() == 3);
}

TEST_CASE("orthonormalize: orthonormal input is preserved up to phase") {
  const Orthonormalized base = orthonormalize(random_block(20, 4, 5, true));
  const Orthonormalized again = orthonormalize(base.q);
  REQUIRE(again.rank == 4);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(std::abs(std::abs(dot(base.q.col(j), again.q.col(j))) - 1.0) < 1e-12);
}

TEST_CASE("orthonormalize: duplicated column drops the rank by one") {
  VectorBlock x = random_block(10, 4, 6);
  x.set_columns(3, x.columns(1, 1));
  CHECK(orthonormalize(x).rank == 3);
}

TEST_CASE("orthonormalize: random 50x10 block") {
  const VectorBlock x = random_block(50, 10, 7, true);
  const Orthonormalized o = orthonormalize(x);
  REQUIRE(o.rank == 10);
  CHECK(orthonormality_defect(o.q) < 1e-12);
  // span(Q) = span(X): X - Q Q^H X vanishes.
  CHECK(max_abs(subtract(x, multiply(o.q, adjoint_multiply(o.q, x)))) < 1e-12);
}

TEST_CASE("orthonormalize: zero input has rank zero") {
  CHECK(orthonormalize(VectorBlock(5, 3)).rank == 0);
}

TEST_CASE("reduced_solve: small closed forms") {
  DenseMatrix a(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  ReducedSolution s = reduced_solve({a, DenseMatrix::identity(2)});
  REQUIRE(s.values.size() == 2);
  CHECK(s.values[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.values[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(std::abs(s.vectors(0, 0)) - 1.0) < 1e-15);
  CHECK(std::abs(s.vectors(1, 0)) < 1e-15);

  DenseMatrix swap(2, 2);
  swap(0, 1) = 1.0;
  swap(1, 0) = 1.0;
  s = reduced_solve({swap, DenseMatrix::identity(2)});
  CHECK(s.values[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(s.values[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("reduced_solve: random Hermitian pencil residual") {
  const std::size_t m0 = 8;
  const DenseMatrix a = random_hermitian_dense(m0, 11);
  const DenseMatrix g = random_block(m0, m0, 12, true);
  DenseMatrix b = adjoint_multiply(g, g);
  for (std::size_t i = 0; i < m0; ++i) b(i, i) += 1.0;
  const ReducedSolution s = reduced_solve({a, b});
  REQUIRE(s.effective_dim == m0);
  CHECK_FALSE(s.truncated);
  DenseMatrix lam(m0, m0);
  for (std::size_t i = 0; i < m0; ++i) lam(i, i) = s.values[i];
  const DenseMatrix r = subtract(multiply(a, s.vectors), multiply(multiply(b, s.vectors), lam));
  CHECK(max_abs(r) < 1e-10 * max_abs(a));
  DenseMatrix xbx = multiply(adjoint(s.vectors), multiply(b, s.vectors));
  for (std::size_t i = 0; i < m0; ++i) xbx(i, i) -= 1.0;
  CHECK(max_abs(xbx) < 1e-10);
  CHECK(std::is_sorted(s.values.begin(), s.values.end()));
}

TEST_CASE("reduced_solve: rank-deficient B is truncated") {
  // Q with a repeated column makes B_Q exactly singular.
  const DenseMatrix a0 = random_symmetric_dense(10, 13);
  VectorBlock q = random_block(10, 4, 14);
  q.set_columns(3, q.columns(0, 1));
  const DenseMatrix aq = adjoint_multiply(q, multiply(a0, q));
  const DenseMatrix bq = adjoint_multiply(q, q);
  const ReducedSolution s = reduced_solve({aq, bq});
  CHECK(s.truncated);
  CHECK(s.effective_dim == 3);
  CHECK(s.vectors.cols() == 3);
  DenseMatrix lam(3, 3);
  for (std::size_t i = 0; i < 3; ++i) lam(i, i) = s.values[i];
  CHECK(max_abs(subtract(multiply(aq, s.vectors), multiply(multiply(bq, s.vectors), lam))) <
        1e-10 * max_abs(aq));
}

TEST_CASE("dense_eig: closed forms") {
  EigenDecomposition e = dense_eig(make_diagonal({3.0, 1.0, 2.0}));
  CHECK(e.values == std::vector<double>{1.0, 2.0, 3.0});

  DenseMatrix swap(2, 2);
  swap(0, 1) = 1.0;
  swap(1, 0) = 1.0;
  e = dense_eig(swap);
  CHECK(e.values[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-15));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(std::abs(e.vectors(0, 0)) - s) < 1e-15);
  CHECK(std::abs(e.vectors(0, 0) + e.vectors(1, 0)) < 1e-15);  // (1, -1) / sqrt 2
  CHECK(std::abs(e.vectors(0, 1) - e.vectors(1, 1)) < 1e-15);  // (1, 1) / sqrt 2
}

TEST_CASE("dense_eig: residual and unitarity on random matrices") {
  for (bool complex_case : {false, true}) {
    const DenseMatrix a =
        complex_case ? random_hermitian_dense(60, 21) : random_symmetric_dense(60, 21);
    const EigenDecomposition e = dense_eig(a);
    DenseMatrix lam(60, 60);
    for (std::size_t i = 0; i < 60; ++i) lam(i, i) = e.values[i];
    const double anorm = dense_eig(a).values.back() - dense_eig(a).values.front();
    CHECK(max_abs(subtract(multiply(a, e.vectors), multiply(e.vectors, lam))) < 1e-10 * anorm);
    CHECK(orthonormality_defect(e.vectors) < 1e-10);
    CHECK(std::is_sorted(e.values.begin(), e.values.end()));
    CHECK(e.vectors.is_real() == !complex_case);
  }
}

TEST_CASE("dense_eig: extreme eigenvalues agree with shifted inverse iteration") {
  // Independent check: inverse iteration uses only LU solves and products.
  const DenseMatrix a = random_symmetric_dense(120, 31);
  const HermitianOperator op = operator_from_dense(a);
  const EigenDecomposition e = dense_eig(op);
  for (double target : {e.values.front(), e.values.back()}) {
    const Complex sigma = target + 1e-3;
    VectorBlock v = random_block(120, 1, 32);
    double rq = 0.0;
    for (int it = 0; it < 30; ++it) {
      v = dense_shifted_solve(op, sigma, v);
      normalize_columns(v);
      rq = dot(v.col(0), op.apply(v).col(0)).real();
    }
    CHECK(std::abs(rq - target) < 1e-8);
  }
}

TEST_CASE("dense_eig: size guard") {
  const HermitianOperator big(
      dense_eig_limit + 1, [](std::span<const Complex> x, std::span<Complex> y) {
        std::copy(x.begin(), x.end(), y.begin());
      },
      Symmetry::real_symmetric, 1.0);
  CHECK_THROWS_AS(dense_eig(big), Error);
}

TEST_CASE("filtered matrix spectrum equals the filter of the spectrum") {
  const DenseMatrix a = random_symmetric_dense(80, 41);
  const HermitianOperator op = operator_from_dense(a);
  const EigenDecomposition e = dense_eig(a);
  ContourRule rule = build_trapezoid(e.values[10], e.values[30], 4);
  rule.symmetrized = false;
  std::vector<VectorBlock> ys;
  for (const auto& nw : full_nodes(rule))
    ys.push_back(dense_shifted_solve(op, nw.node, DenseMatrix::identity(80)));
  DenseMatrix rho = accumulate_q(rule, ys);
  hermitianize(rho);
  const EigenDecomposition fe = dense_eig(rho);
  std::vector<double> want, got;
  for (double l : e.values) want.push_back(filter_value(rule, l).real());
  for (double g : fe.values) got.push_back(g);
  auto by_magnitude = [](double x, double y) { return std::abs(x) > std::abs(y); };
  std::sort(want.begin(), want.end(), by_magnitude);
  std::sort(got.begin(), got.end(), by_magnitude);
  for (std::size_t j = 0; j < want.size(); ++j) CHECK(std::abs(want[j] - got[j]) <= 1e-10);
}

TEST_CASE("dense_shifted_solve: closed forms") {
  const HermitianOperator zero = make_diagonal({0.0, 0.0, 0.0});
  const VectorBlock x = random_block(3, 2, 51, true);
  VectorBlock half = x;
  for (auto& v : half.data()) v /= 2.0;
  CHECK(max_diff(dense_shifted_solve(zero, 2.0, x), half) < 1e-15);

  const HermitianOperator d = make_diagonal({1.0, 3.0});
  const VectorBlock y = dense_shifted_solve(d, {2.0, 1.0}, DenseMatrix::identity(2));
  CHECK(std::abs(y(0, 0) - 1.0 / Complex(1.0, 1.0)) < 1e-15);
  CHECK(std::abs(y(1, 1) - 1.0 / Complex(-1.0, 1.0)) < 1e-15);
  CHECK(std::abs(y(0, 1)) == 0.0);
  CHECK(std::abs(y(1, 0)) == 0.0);
}

TEST_CASE("dense_shifted_solve: random residual and singular shift") {
  const HermitianOperator op = operator_from_dense(random_hermitian_dense(30, 61));
  const VectorBlock x = random_block(30, 3, 62, true);
  const Complex z{0.3, 0.7};
  const VectorBlock y = dense_shifted_solve(op, z, x);
  for (double r : true_residuals(op, z, x, y)) CHECK(r < 1e-12 * block_norm(x));

  const HermitianOperator d = make_diagonal({1.0, 2.0, 3.0});
  CHECK_THROWS_AS((void)dense_shifted_solve(d, 2.0, x), std::invalid_argument);
  try {
    (void)dense_shifted_solve(d, 2.0, random_block(3, 1, 63));
    FAIL("expected a pole error");
  } catch (const PoleError& e) {
    CHECK(e.shift() == Complex{2.0});
    CHECK(std::string(e.what()).find("z = 2") != std::string::npos);
  }
}

}  // TEST_SUITE
