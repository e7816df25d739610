#include "ifeast/generators.hpp"

#include <array>
#include <cmath>
#include <map>
#include <random>
#include <tuple>

namespace ifeast {

HermitianOperator make_diagonal(const std::vector<double>& values) {
  std::vector<Triplet> t;
  t.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) t.push_back({i, i, values[i]});
  return HermitianOperator(csr_from_triplets(values.size(), t), Symmetry::real_symmetric);
}

DenseMatrix random_symmetric_dense(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix a(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) {
      const double v = dist(rng);
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

DenseMatrix random_hermitian_dense(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix a(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    a(j, j) = dist(rng);
    for (std::size_t i = 0; i < j; ++i) {
      const double re = dist(rng);
      const double im = dist(rng);
      a(i, j) = {re, im};
      a(j, i) = {re, -im};
    }
  }
  return a;
}

HermitianOperator make_dimer_surrogate(const DimerSurrogate& p) {
  // Eighth-order central difference weights for the second derivative.
  constexpr std::array<double, 5> w{-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0,
                                    -1.0 / 560.0};
  const int reach = static_cast<int>(std::ceil(p.sphere_radius));
  const double r2 = p.sphere_radius * p.sphere_radius;

  std::map<std::tuple<int, int, int>, std::size_t> index;
  for (int i = -reach; i <= reach; ++i)
    for (int j = -reach; j <= reach; ++j)
      for (int k = -reach; k <= reach; ++k)
        if (double(i * i + j * j + k * k) <= r2) index.emplace(std::tuple{i, j, k}, index.size());

  const double h2 = p.spacing * p.spacing;
  std::vector<Triplet> t;
  for (const auto& [pt, row] : index) {
    const auto [i, j, k] = pt;
    const double x = i * p.spacing, y = j * p.spacing, z = k * p.spacing;
    double v = 0.0;
    for (double centre : {-0.5 * p.bond_length, 0.5 * p.bond_length}) {
      const double d2 = x * x + y * y + (z - centre) * (z - centre);
      v -= p.well_depth * std::exp(-d2 / (p.well_width * p.well_width));
    }
    t.push_back({row, row, -0.5 * 3.0 * w[0] / h2 + v});
    for (int s = 1; s <= 4; ++s) {
      for (const auto& d : {std::array{s, 0, 0}, std::array{-s, 0, 0}, std::array{0, s, 0},
                            std::array{0, -s, 0}, std::array{0, 0, s}, std::array{0, 0, -s}}) {
        auto it = index.find({i + d[0], j + d[1], k + d[2]});
        if (it != index.end()) t.push_back({row, it->second, -0.5 * w[s] / h2});
      }
    }
  }
  return HermitianOperator(csr_from_triplets(index.size(), t), Symmetry::real_symmetric);
}

}  // namespace ifeast
