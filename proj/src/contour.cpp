#include "ifeast/contour.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ifeast/errors.hpp"

namespace ifeast {

std::vector<NodeWeight> full_nodes(const ContourRule& rule) {
  std::vector<NodeWeight> out;
  out.reserve(rule.full_count());
  for (std::size_t k = 0; k < rule.nc_up; ++k) out.push_back({rule.nodes[k], rule.weights[k]});
  for (std::size_t k = 0; k < rule.nc_up; ++k)
    out.push_back({std::conj(rule.nodes[k]), std::conj(rule.weights[k])});
  return out;
}

ContourRule build_trapezoid(double lambda_min, double lambda_max, std::size_t nc_up) {
  if (!(lambda_min < lambda_max))
    throw Error("contour", "build_trapezoid: degenerate interval (" + std::to_string(lambda_min) +
                               ", " + std::to_string(lambda_max) + ")");
  if (nc_up == 0) throw Error("contour", "build_trapezoid: nc_up must be at least 1");

  ContourRule rule;
  rule.center = 0.5 * (lambda_min + lambda_max);
  rule.radius = 0.5 * (lambda_max - lambda_min);
  rule.nc_up = nc_up;
  const double nc = 2.0 * static_cast<double>(nc_up);
  for (std::size_t k = 1; k <= nc_up; ++k) {
    const double theta = std::numbers::pi * (2.0 * static_cast<double>(k) - 1.0) / nc;
    const Complex e = std::polar(1.0, theta);
    rule.nodes.push_back(rule.center + rule.radius * e);
    rule.weights.push_back((rule.radius / nc) * e);
  }
  return rule;
}

Complex filter_value(const ContourRule& rule, Complex lambda) {
  // Outside the contour the terms cancel down to about |u|^{-n_c}, so the
  // sum is carried in extended precision.
  using Wide = std::complex<long double>;
  const double guard = 1e-14 * rule.radius;
  const bool real_argument = lambda.imag() == 0.0;
  const Wide l(lambda);
  Wide upper = 0.0L;
  Wide lower = 0.0L;
  for (std::size_t k = 0; k < rule.nc_up; ++k) {
    const Complex z = rule.nodes[k];
    if (std::abs(z - lambda) <= guard || std::abs(std::conj(z) - lambda) <= guard)
      throw PoleError("contour", "filter_value: lambda = " + format_complex(lambda) +
                                     " coincides with a quadrature node", lambda);
    // Node and weight rebuilt from the angle so they carry full extended precision.
    const long double nc = 2.0L * static_cast<long double>(rule.nc_up);
    const long double theta = std::numbers::pi_v<long double> *
                              (2.0L * static_cast<long double>(k + 1) - 1.0L) / nc;
    const Wide e = std::polar(1.0L, theta);
    const long double c = rule.center, r = rule.radius;
    const Wide zw = c + r * e;
    const Wide w = (r / nc) * e;
    upper += w / (zw - l);
    if (!(rule.symmetrized && real_argument)) lower += std::conj(w) / (std::conj(zw) - l);
  }
  if (rule.symmetrized && real_argument) return static_cast<double>(2.0L * upper.real());
  return Complex(upper + lower);
}

std::vector<Complex> solve_shifts(const ContourRule& rule) {
  std::vector<Complex> shifts;
  if (rule.symmetrized) return rule.nodes;
  for (const auto& nw : full_nodes(rule)) shifts.push_back(nw.node);
  return shifts;
}

VectorBlock accumulate_q(const ContourRule& rule, std::span<const VectorBlock> ys) {
  const std::size_t expected = rule.symmetrized ? rule.nc_up : rule.full_count();
  if (ys.size() != expected)
    throw std::invalid_argument("accumulate_q: expected " + std::to_string(expected) +
                                " solution blocks, got " + std::to_string(ys.size()));
  if (ys.empty()) throw std::invalid_argument("accumulate_q: no solution blocks");
  const std::size_t n = ys.front().rows();
  const std::size_t m = ys.front().cols();
  for (const auto& y : ys)
    if (y.rows() != n || y.cols() != m)
      throw std::invalid_argument("accumulate_q: solution blocks differ in shape");

  VectorBlock q(n, m);
  auto qd = q.data();
  if (rule.symmetrized) {
    for (std::size_t k = 0; k < rule.nc_up; ++k) {
      const Complex w = rule.weights[k];
      const auto yd = ys[k].data();
      for (std::size_t i = 0; i < qd.size(); ++i) qd[i] += 2.0 * (w * yd[i]).real();
    }
    return q;
  }
  const auto nodes = full_nodes(rule);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Complex w = nodes[k].weight;
    const auto yd = ys[k].data();
    for (std::size_t i = 0; i < qd.size(); ++i) qd[i] += w * yd[i];
  }
  return q;
}

}  // namespace ifeast
