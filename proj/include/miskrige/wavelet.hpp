#pragma once

#include <ostream>
#include <span>
#include <vector>

namespace miskrige {

/// Daubechies lowpass filter with p vanishing moments (2p taps), p in 1..4.
/// Normalised so that sum h_k = sqrt(2).
std::vector<double> daubechies_filter(int order);

/// Worst deviations from the orthonormal-filter identities.
struct FilterResiduals {
  double sum = 0.0;          // |sum h_k - sqrt 2|
  double orthogonal = 0.0;   // max_m |sum h_k h_{k+2m} - delta_m0|
  double alternating = 0.0;  // |sum (-1)^k h_k|
};

FilterResiduals filter_residuals(std::span<const double> h);

/// Sampled scaling function phi and mother wavelet psi on their common support
/// [0, 2p-1] at spacing 2^-J.
///
/// phi is exact at dyadic points: its integer values solve the refinement
/// eigenproblem (normalised to sum 1) and each finer level follows from
/// phi(x) = sqrt2 sum h_k phi(2x - k). Then psi(x) = sqrt2 sum g_k phi(2x - k)
/// with g_k = (-1)^k h_{2p-1-k}. Off-grid values use linear interpolation; the
/// Haar case (p = 1) returns exact indicators instead.
class WaveletTable {
 public:
  WaveletTable(int order, int resolution);

  int order() const { return order_; }
  int resolution() const { return resolution_; }
  /// Length 2p-1 of the support [0, 2p-1].
  int support() const { return 2 * order_ - 1; }
  double spacing() const { return spacing_; }
  const std::vector<double>& filter() const { return filter_; }
  const std::vector<double>& phi_samples() const { return phi_; }
  const std::vector<double>& psi_samples() const { return psi_; }

  double phi(double t) const;
  double psi(double t) const;

  /// CSV with columns x, phi, psi at every table point.
  void write_csv(std::ostream& out) const;

 private:
  double lookup(const std::vector<double>& samples, double t) const;

  int order_;
  int resolution_;
  double spacing_;
  std::vector<double> filter_;
  std::vector<double> phi_;
  std::vector<double> psi_;
};

/// Validates the order and resolution (p in 1..4, J in 8..16) and builds the table.
WaveletTable build_wavelet_table(int order, int resolution);

}  // namespace miskrige
