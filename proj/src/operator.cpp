#include "ifeast/operator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace ifeast {

CsrMatrix csr_from_triplets(std::size_t n, std::span<const Triplet> triplets) {
  std::vector<std::size_t> order(triplets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ta = triplets[a];
    const auto& tb = triplets[b];
    return ta.row != tb.row ? ta.row < tb.row : ta.col < tb.col;
  });

  CsrMatrix m;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);
  constexpr auto none = static_cast<std::size_t>(-1);
  std::size_t prev_row = none;
  std::size_t prev_col = none;
  for (std::size_t idx : order) {
    const auto& t = triplets[idx];
    if (t.row >= n || t.col >= n)
      throw std::out_of_range("csr_from_triplets: index (" + std::to_string(t.row) + ", " +
                              std::to_string(t.col) + ") outside dimension " + std::to_string(n));
    if (t.row == prev_row && t.col == prev_col) {
      m.values.back() += t.value;
      continue;
    }
    m.col_idx.push_back(t.col);
    m.values.push_back(t.value);
    ++m.row_ptr[t.row + 1];
    prev_row = t.row;
    prev_col = t.col;
  }
  for (std::size_t i = 1; i <= n; ++i) m.row_ptr[i] += m.row_ptr[i - 1];
  return m;
}

namespace {

double csr_row_sum_bound(const CsrMatrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    double s = 0.0;
    for (std::size_t p = m.row_ptr[i]; p < m.row_ptr[i + 1]; ++p) s += std::abs(m.values[p]);
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

HermitianOperator::HermitianOperator(CsrMatrix csr, Symmetry symmetry)
    : n_{csr.n},
      symmetry_{symmetry},
      csr_{std::move(csr)},
      counter_{std::make_unique<std::atomic<std::uint64_t>>(0)} {
  if (n_ == 0) throw std::invalid_argument("HermitianOperator: dimension must be positive");
  if (csr_.row_ptr.size() != n_ + 1)
    throw std::invalid_argument("HermitianOperator: row_ptr must have n + 1 entries");
  norm_est_ = csr_row_sum_bound(csr_);
}

HermitianOperator::HermitianOperator(std::size_t n, ApplyRule rule, Symmetry symmetry,
                                     double norm_bound)
    : n_{n},
      symmetry_{symmetry},
      rule_{std::move(rule)},
      counter_{std::make_unique<std::atomic<std::uint64_t>>(0)} {
  if (n_ == 0) throw std::invalid_argument("HermitianOperator: dimension must be positive");
  if (!rule_) throw std::invalid_argument("HermitianOperator: empty apply rule");
  if (norm_bound > 0.0) {
    norm_est_ = norm_bound;
    return;
  }
  // Power iteration approaches ||A|| from below; keep 10% headroom.
  std::mt19937_64 gen(0x1f3a5u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Complex> x(n_), y(n_);
  for (auto& v : x) v = dist(gen);
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    const double nx = norm2(x);
    if (nx == 0.0) break;
    scale(1.0 / nx, x);
    apply_uncounted(x, y);
    lambda = norm2(y);
    std::swap(x, y);
  }
  norm_est_ = 1.1 * lambda;
}

const CsrMatrix& HermitianOperator::csr() const {
  if (rule_) throw std::logic_error("HermitianOperator::csr: operator has no sparse storage");
  return csr_;
}

void HermitianOperator::apply_uncounted(std::span<const Complex> x, std::span<Complex> y) const {
  if (x.size() != n_ || y.size() != n_)
    throw std::invalid_argument("HermitianOperator::apply: vector length " +
                                std::to_string(x.size()) + " does not match dimension " +
                                std::to_string(n_));
  if (rule_) {
    rule_(x, y);
    return;
  }
  for (std::size_t i = 0; i < n_; ++i) {
    Complex s = 0.0;
    for (std::size_t p = csr_.row_ptr[i]; p < csr_.row_ptr[i + 1]; ++p)
      s += csr_.values[p] * x[csr_.col_idx[p]];
    y[i] = s;
  }
}

void HermitianOperator::apply(std::span<const Complex> x, std::span<Complex> y) const {
  apply_uncounted(x, y);
  counter_->fetch_add(1, std::memory_order_relaxed);
}

VectorBlock HermitianOperator::apply(const VectorBlock& x) const {
  if (x.rows() != n_)
    throw std::invalid_argument("HermitianOperator::apply: block has " + std::to_string(x.rows()) +
                                " rows, operator dimension is " + std::to_string(n_));
  VectorBlock y(n_, x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) apply(x.col(j), y.col(j));
  return y;
}

DenseMatrix HermitianOperator::to_dense() const {
  DenseMatrix a(n_, n_);
  if (!rule_) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t p = csr_.row_ptr[i]; p < csr_.row_ptr[i + 1]; ++p)
        a(i, csr_.col_idx[p]) += csr_.values[p];
    return a;
  }
  std::vector<Complex> e(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    std::fill(e.begin(), e.end(), Complex{});
    e[j] = 1.0;
    apply_uncounted(e, a.col(j));
  }
  return a;
}

HermitianOperator operator_from_dense(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("operator_from_dense: matrix not square");
  std::vector<Triplet> t;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i)
      if (a(i, j) != Complex{}) t.push_back({i, j, a(i, j)});
  const Symmetry sym = a.is_real() ? Symmetry::real_symmetric : Symmetry::complex_hermitian;
  return HermitianOperator(csr_from_triplets(a.rows(), t), sym);
}

}  // namespace ifeast
