#pragma once

// Slow reference implementations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>

#include "miskrige/fem.hpp"
#include "miskrige/kernels.hpp"
#include "miskrige/wavelet.hpp"

namespace miskrige::testing {

// Wavelet kernel summed over a generous translate range with no support pruning.
inline double wavelet_brute_force(const WaveletSpec& spec, const WaveletTable& table, double x, double y) {
  const int reach = table.support();
  const double lo = std::min(x, y);
  const double hi = std::max(x, y);
  double total = 0.0;
  for (int k = static_cast<int>(std::floor(lo)) - reach - 2; k <= static_cast<int>(std::ceil(hi)) + 2; ++k) {
    total += table.phi(x - k) * table.phi(y - k);
  }
  for (int j = 0; j <= spec.level; ++j) {
    const double scale = std::ldexp(1.0, j);
    double level = 0.0;
    const long first = static_cast<long>(std::floor(scale * lo)) - reach - 2;
    const long last = static_cast<long>(std::ceil(scale * hi)) + 2;
    for (long k = first; k <= last; ++k) {
      level += table.psi(scale * x - static_cast<double>(k)) * table.psi(scale * y - static_cast<double>(k));
    }
    total += std::pow(2.0, -2.0 * j * spec.s) * scale * level;
  }
  return total;
}

// Eigen-expansion sum_i (1 + lambda_i)^{-1} psi_i(x) psi_i(y).
inline double fem_eigen_expansion(const FemAssembly& fem, double x, double y) {
  const auto pairs = fem_eigendecompose(fem, fem.node_count());
  const BasisValues bx = fem.basis(x);
  const BasisValues by = fem.basis(y);
  double total = 0.0;
  for (const auto& pair : pairs) {
    double px = 0.0;
    double py = 0.0;
    for (const auto& [i, v] : bx) px += v * pair.vector(i);
    for (const auto& [i, v] : by) py += v * pair.vector(i);
    total += px * py / (1.0 + pair.value);
  }
  return total;
}

}  // namespace miskrige::testing
