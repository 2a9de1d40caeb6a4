#include "miskrige/wavelet.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <iomanip>
#include <string>

#include "miskrige/error.hpp"

namespace miskrige {

namespace {

// Reconstruction lowpass filters (sum sqrt 2), indexed by number of vanishing moments.
const std::vector<std::vector<double>>& filter_bank() {
  static const std::vector<std::vector<double>> bank = {
      {0.7071067811865476, 0.7071067811865476},
      {0.48296291314453416, 0.8365163037378079, 0.2241438680420134, -0.12940952255126037},
      {0.33267055295008263, 0.8068915093110925, 0.45987750211849154, -0.13501102001025458,
       -0.08544127388202666, 0.03522629188570953},
      {0.2303778133088965, 0.7148465705529157, 0.6308807679298589, -0.027983769416859854,
       -0.18703481171909309, 0.030841381835560764, 0.0328830116668852,
       -0.010597401785069032},
  };
  return bank;
}

void check_order(int order) {
  if (order < 1 || order > 4) {
    throw ValidationError("Daubechies order must be in 1..4, got " + std::to_string(order));
  }
}

void check_filter(const std::vector<double>& h, int order) {
  const FilterResiduals r = filter_residuals(h);
  if (r.sum > 1e-12 || r.orthogonal > 1e-10 || r.alternating > 1e-10) {
    throw NumericalError("Daubechies filter of order " + std::to_string(order) +
                         " fails its orthonormality identities");
  }
}

// Values at the integers 0..L from (T - I) v = 0 with sum v = 1, where
// T[n][m] = sqrt2 h_{2n-m}.
std::vector<double> integer_values(const std::vector<double>& h) {
  // Haar: T = I, so the system is degenerate; the right-continuous indicator is 1, 0.
  if (h.size() == 2) return {1.0, 0.0};
  const int len = static_cast<int>(h.size()) - 1;
  const int size = len + 1;
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(size, size);
  for (int n = 0; n < size; ++n) {
    for (int m = 0; m < size; ++m) {
      const int k = 2 * n - m;
      if (k >= 0 && k <= len) system(n, m) = std::sqrt(2.0) * h[k];
    }
    system(n, n) -= 1.0;
  }
  Eigen::MatrixXd replaced = system;
  replaced.row(size - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs(size - 1) = 1.0;
  const Eigen::VectorXd v = replaced.fullPivLu().solve(rhs);
  const double residual = (system * v).cwiseAbs().maxCoeff();
  if (!std::isfinite(residual) || residual > 1e-6) {
    throw NumericalError("scaling-function refinement did not converge (residual " +
                         std::to_string(residual) + ")");
  }
  return {v.data(), v.data() + size};
}

}  // namespace

std::vector<double> daubechies_filter(int order) {
  check_order(order);
  return filter_bank()[order - 1];
}

FilterResiduals filter_residuals(std::span<const double> h) {
  FilterResiduals r;
  const std::size_t taps = h.size();
  double sum = 0.0;
  double alternating = 0.0;
  for (std::size_t k = 0; k < taps; ++k) {
    sum += h[k];
    alternating += (k % 2 == 0 ? 1.0 : -1.0) * h[k];
  }
  r.sum = std::abs(sum - std::sqrt(2.0));
  r.alternating = std::abs(alternating);
  for (std::size_t shift = 0; shift < taps; shift += 2) {
    double dot = 0.0;
    for (std::size_t k = 0; k + shift < taps; ++k) dot += h[k] * h[k + shift];
    r.orthogonal = std::max(r.orthogonal, std::abs(dot - (shift == 0 ? 1.0 : 0.0)));
  }
  return r;
}

WaveletTable::WaveletTable(int order, int resolution)
    : order_(order),
      resolution_(resolution),
      spacing_(std::ldexp(1.0, -resolution)),
      filter_(daubechies_filter(order)) {
  check_filter(filter_, order);
  const int len = support();
  const double root2 = std::sqrt(2.0);

  // Level 0 holds the integer values; level l doubles the sample density.
  std::vector<double> level = integer_values(filter_);
  for (int l = 1; l <= resolution; ++l) {
    const long long count = static_cast<long long>(len) << l;
    const long long stride = 1LL << (l - 1);
    std::vector<double> next(static_cast<std::size_t>(count + 1), 0.0);
    for (long long i = 0; i <= count; ++i) {
      double value = 0.0;
      for (int k = 0; k <= len; ++k) {
        // phi(i 2^-l) = sqrt2 sum_k h_k phi((i - k 2^{l-1}) 2^{-(l-1)})
        const long long j = i - k * stride;
        if (j >= 0 && j <= (static_cast<long long>(len) << (l - 1))) {
          value += filter_[k] * level[static_cast<std::size_t>(j)];
        }
      }
      next[static_cast<std::size_t>(i)] = root2 * value;
    }
    level = std::move(next);
  }
  phi_ = std::move(level);

  const long long count = static_cast<long long>(len) << resolution;
  const long long scale = 1LL << resolution;
  psi_.assign(static_cast<std::size_t>(count + 1), 0.0);
  for (long long i = 0; i <= count; ++i) {
    double value = 0.0;
    for (int k = 0; k <= len; ++k) {
      const double g = (k % 2 == 0 ? 1.0 : -1.0) * filter_[len - k];
      const long long j = 2 * i - k * scale;
      if (j >= 0 && j <= count) value += g * phi_[static_cast<std::size_t>(j)];
    }
    psi_[static_cast<std::size_t>(i)] = root2 * value;
  }
}

double WaveletTable::lookup(const std::vector<double>& samples, double t) const {
  if (!(t >= 0.0) || t >= static_cast<double>(support())) return 0.0;
  const double pos = std::ldexp(t, resolution_);
  const double cell = std::floor(pos);
  const auto i = static_cast<std::size_t>(cell);
  if (i + 1 >= samples.size()) return samples.back();
  const double frac = pos - cell;
  return samples[i] + frac * (samples[i + 1] - samples[i]);
}

double WaveletTable::phi(double t) const {
  if (order_ == 1) return (t >= 0.0 && t < 1.0) ? 1.0 : 0.0;
  return lookup(phi_, t);
}

double WaveletTable::psi(double t) const {
  if (order_ == 1) {
    if (t >= 0.0 && t < 0.5) return 1.0;
    if (t >= 0.5 && t < 1.0) return -1.0;
    return 0.0;
  }
  return lookup(psi_, t);
}

void WaveletTable::write_csv(std::ostream& out) const {
  out << "x,phi,psi\n" << std::setprecision(17);
  for (std::size_t i = 0; i < phi_.size(); ++i) {
    const double x = static_cast<double>(i) * spacing_;
    out << x << ',' << phi(x) << ',' << psi(x) << '\n';
  }
}

WaveletTable build_wavelet_table(int order, int resolution) {
  check_order(order);
  if (resolution < 8 || resolution > 16) {
    throw ValidationError("wavelet table resolution must be in 8..16, got " +
                          std::to_string(resolution));
  }
  return WaveletTable(order, resolution);
}

}  // namespace miskrige
