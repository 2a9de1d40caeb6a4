#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <optional>
#include <span>

#include "miskrige/geometry.hpp"
#include "miskrige/kernels.hpp"

namespace miskrige {

enum class GramStorage { dense, banded };

/// Symmetric kernel matrix on a design. Banded storage keeps only the entries
/// within the kernel's support radius; both storages hold identical values.
class GramMatrix {
 public:
  GramMatrix(Eigen::MatrixXd dense);
  GramMatrix(Eigen::SparseMatrix<double> banded);

  GramStorage storage() const { return storage_; }
  Eigen::Index size() const { return size_; }
  double operator()(Eigen::Index i, Eigen::Index j) const;
  /// Dense copy (or the dense storage itself).
  Eigen::MatrixXd to_dense() const;
  /// Fraction of entries that are nonzero.
  double nonzero_fraction() const;
  /// Full width 2b+1 of the band, b = max |i-j| over nonzero entries.
  Eigen::Index bandwidth() const;

 private:
  GramStorage storage_;
  Eigen::Index size_;
  Eigen::MatrixXd dense_;
  Eigen::SparseMatrix<double> banded_;
};

/// Builds [Phi(x_i, x_j)]. Banded storage is chosen when the kernel has a support
/// radius and some design pair is at least that far apart; `force` overrides.
GramMatrix assemble_gram(const Kernel& kernel, const DesignSet& design,
                         std::optional<GramStorage> force = std::nullopt);

/// Smallest eigenvalue of a symmetric matrix: dense eigensolve up to `dense_limit`
/// rows, inverse power iteration above.
double min_eigenvalue(const Eigen::MatrixXd& matrix, Eigen::Index dense_limit = 2000);
double min_eigenvalue(const GramMatrix& gram, Eigen::Index dense_limit = 2000);

/// Fitted kriging interpolant with coefficients alpha = (K + lambda I)^{-1} Y.
/// Immutable; predictions are thread-safe.
class KrigingModel {
 public:
  const Kernel& kernel() const { return *kernel_; }
  const DesignSet& design() const { return design_; }
  double nugget() const { return nugget_; }
  const Eigen::VectorXd& observations() const { return observations_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  const GramMatrix& gram() const { return gram_; }
  /// ||(K + lambda I) alpha - Y|| / ||Y|| after refinement.
  double relative_residual() const { return relative_residual_; }

  double predict_mean(const Point& x) const;
  Eigen::VectorXd predict_mean(std::span<const Point> xs) const;
  /// Phi(x,x) - k^T (K + lambda I)^{-1} k. Small negative roundoff (above
  /// -1e-8 Phi(x,x)) is clamped to 0; anything lower raises NumericalBreakdown.
  double predict_variance(const Point& x) const;
  Eigen::VectorXd predict_variance(std::span<const Point> xs) const;

  /// Y - K alpha, the misfit at the design points.
  Eigen::VectorXd residual_on_design() const;
  /// alpha^T K alpha, the native-space norm of the interpolant squared.
  double rkhs_norm_sq() const;

 private:
  friend KrigingModel fit(KernelPtr, const DesignSet&, const Eigen::VectorXd&, double,
                          std::optional<GramStorage>);
  KrigingModel(KernelPtr kernel, DesignSet design, GramMatrix gram);

  double variance_from(const Point& x, const Eigen::VectorXd& k) const;

  KernelPtr kernel_;
  DesignSet design_;
  GramMatrix gram_;
  double nugget_ = 0.0;
  Eigen::VectorXd observations_;
  Eigen::VectorXd coefficients_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  double relative_residual_ = 0.0;
};

/// Factorizes K + lambda I and solves for the coefficients with one step of
/// iterative refinement. A pivot at or below max(n,16) * 1e-14 * max diag counts as
/// failure and raises FactorizationFailed; no nugget is added automatically.
KrigingModel fit(KernelPtr kernel, const DesignSet& design, const Eigen::VectorXd& observations,
                 double nugget, std::optional<GramStorage> storage = std::nullopt);

}  // namespace miskrige
