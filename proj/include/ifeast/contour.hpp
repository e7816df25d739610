#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ifeast/dense.hpp"

namespace ifeast {

enum class RuleKind { trapezoid };

/// Quadrature discretization of the circle enclosing (lambda_min, lambda_max).
///
/// Only the upper half nodes are stored. The lower half nodes are their
/// conjugates with conjugate weights; full_nodes() lists both halves.
struct ContourRule {
  RuleKind kind = RuleKind::trapezoid;
  double center = 0.0;
  double radius = 1.0;
  std::size_t nc_up = 0;
  std::vector<Complex> nodes;    // Im z_k > 0
  std::vector<Complex> weights;
  bool symmetrized = true;       // evaluate lower half via conjugation

  std::size_t full_count() const noexcept { return 2 * nc_up; }
  double lambda_min() const noexcept { return center - radius; }
  double lambda_max() const noexcept { return center + radius; }
};

struct NodeWeight {
  Complex node;
  Complex weight;
};

/// Upper nodes k = 1..nc_up followed by their conjugates in the same order.
std::vector<NodeWeight> full_nodes(const ContourRule& rule);

/// Trapezoid rule on the circle: n_c = 2 nc_up nodes at angles
/// theta_k = pi (2k - 1) / n_c (half a step off the real axis),
/// z_k = c + r e^{i theta_k}, w_k = (r / n_c) e^{i theta_k}.
ContourRule build_trapezoid(double lambda_min, double lambda_max, std::size_t nc_up);

/// rho(lambda) = sum over the full circle of w_k / (z_k - lambda).
/// Evaluated in extended precision. Throws PoleError when lambda is within
/// 1e-14 r of a node.
Complex filter_value(const ContourRule& rule, Complex lambda);

/// Q = sum_k w_k Y_k. With symmetrized == true, ys holds one block per
/// upper node and Q = 2 Re sum_k w_k Y_k (real A, real X). Otherwise ys
/// holds one block per full_nodes() entry. Summation runs in ascending k.
VectorBlock accumulate_q(const ContourRule& rule, std::span<const VectorBlock> ys);

/// Shifts that must be solved for: upper nodes when symmetrized, else all.
std::vector<Complex> solve_shifts(const ContourRule& rule);

}  // namespace ifeast
