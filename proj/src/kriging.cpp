#include "miskrige/kriging.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "miskrige/error.hpp"
#include "miskrige/parallel.hpp"

namespace miskrige {

GramMatrix::GramMatrix(Eigen::MatrixXd dense)
    : storage_(GramStorage::dense), size_(dense.rows()), dense_(std::move(dense)) {}

GramMatrix::GramMatrix(Eigen::SparseMatrix<double> banded)
    : storage_(GramStorage::banded), size_(banded.rows()), banded_(std::move(banded)) {}

double GramMatrix::operator()(Eigen::Index i, Eigen::Index j) const {
  return storage_ == GramStorage::dense ? dense_(i, j) : banded_.coeff(i, j);
}

Eigen::MatrixXd GramMatrix::to_dense() const {
  return storage_ == GramStorage::dense ? dense_ : Eigen::MatrixXd(banded_);
}

double GramMatrix::nonzero_fraction() const {
  if (size_ == 0) return 0.0;
  Eigen::Index count = 0;
  if (storage_ == GramStorage::dense) {
    count = (dense_.array() != 0.0).count();
  } else {
    for (int col = 0; col < banded_.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(banded_, col); it; ++it) {
        if (it.value() != 0.0) ++count;
      }
    }
  }
  return static_cast<double>(count) / static_cast<double>(size_ * size_);
}

Eigen::Index GramMatrix::bandwidth() const {
  Eigen::Index half = 0;
  if (storage_ == GramStorage::dense) {
    for (Eigen::Index j = 0; j < size_; ++j) {
      for (Eigen::Index i = 0; i < size_; ++i) {
        if (dense_(i, j) != 0.0) half = std::max(half, std::abs(i - j));
      }
    }
  } else {
    for (int col = 0; col < banded_.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(banded_, col); it; ++it) {
        if (it.value() != 0.0) half = std::max<Eigen::Index>(half, std::abs(it.row() - col));
      }
    }
  }
  return 2 * half + 1;
}

namespace {

Eigen::SparseMatrix<double> assemble_banded(const Kernel& kernel, std::span<const Point> points,
                                            double radius) {
  const std::size_t n = points.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a][0] < points[b][0]; });

  // Per sorted position, the entries with later partners closer than the radius.
  std::vector<std::vector<Eigen::Triplet<double>>> rows(n);
  parallel_for(n, [&](std::size_t a) {
    const std::size_t i = order[a];
    for (std::size_t b = a; b < n; ++b) {
      const std::size_t j = order[b];
      if (points[j][0] - points[i][0] >= radius) break;
      const double value = kernel.eval(points[i], points[j]);
      const auto r = static_cast<Eigen::Index>(std::min(i, j));
      const auto c = static_cast<Eigen::Index>(std::max(i, j));
      rows[a].emplace_back(r, c, value);
      if (r != c) rows[a].emplace_back(c, r, value);
    }
  });
  std::vector<Eigen::Triplet<double>> entries;
  for (const auto& row : rows) entries.insert(entries.end(), row.begin(), row.end());
  Eigen::SparseMatrix<double> out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

}  // namespace

GramMatrix assemble_gram(const Kernel& kernel, const DesignSet& design,
                         std::optional<GramStorage> force) {
  const std::span<const Point> points = design.points();
  const std::optional<double> radius = kernel.support_radius();
  GramStorage storage = GramStorage::dense;
  if (force) {
    storage = *force;
  } else if (radius && design.dim() == 1 && !points.empty()) {
    const auto [lo, hi] = std::minmax_element(
        points.begin(), points.end(), [](const Point& a, const Point& b) { return a[0] < b[0]; });
    if ((*hi)[0] - (*lo)[0] >= *radius) storage = GramStorage::banded;
  }
  if (storage == GramStorage::banded) {
    if (!radius || design.dim() != 1) {
      throw ValidationError("banded Gram storage needs a compactly supported 1-D kernel");
    }
    return GramMatrix(assemble_banded(kernel, points, *radius));
  }
  return GramMatrix(kernel.gram(points));
}

double min_eigenvalue(const Eigen::MatrixXd& matrix, Eigen::Index dense_limit) {
  const Eigen::Index n = matrix.rows();
  if (n == 0) throw ValidationError("min_eigenvalue of an empty matrix");
  if (n <= dense_limit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolve failed");
    return solver.eigenvalues()(0);
  }
  // Lanczos on the inverse: its largest eigenvalue is the reciprocal of the smallest
  // one of a positive definite matrix. Full reorthogonalization keeps clustered
  // spectra (typical of nugget-shifted Grams) from stalling.
  Eigen::LDLT<Eigen::MatrixXd> factor(matrix);
  if (factor.info() != Eigen::Success) throw NumericalError("LDLT factorization failed");
  const Eigen::Index steps = std::min<Eigen::Index>(n, 300);
  Eigen::MatrixXd basis(n, steps);
  std::vector<double> alpha;
  std::vector<double> beta;
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0).normalized();
  double previous = 0.0;
  for (Eigen::Index m = 0; m < steps; ++m) {
    basis.col(m) = v;
    Eigen::VectorXd w = factor.solve(v);
    if (!w.allFinite()) return 0.0;
    alpha.push_back(v.dot(w));
    for (int pass = 0; pass < 2; ++pass) {
      w -= basis.leftCols(m + 1) * (basis.leftCols(m + 1).transpose() * w);
    }
    const double b = w.norm();

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (Eigen::Index i = 0; i <= m; ++i) {
      tri(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i > 0) tri(i, i - 1) = tri(i - 1, i) = beta[static_cast<std::size_t>(i - 1)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(tri);
    const double top = ritz.eigenvalues()(m);
    const double bound = std::abs(b * ritz.eigenvectors()(m, m));
    if (top <= 0.0) throw NumericalError("matrix is not positive definite");
    if (bound <= 1e-10 * top || b <= 1e-14 * top || m + 1 == n ||
        (m > 0 && std::abs(top - previous) <= 1e-14 * top)) {
      return 1.0 / top;
    }
    previous = top;
    beta.push_back(b);
    v = w / b;
  }
  throw NumericalError("Lanczos iteration for the smallest eigenvalue did not converge");
}

double min_eigenvalue(const GramMatrix& gram, Eigen::Index dense_limit) {
  return min_eigenvalue(gram.to_dense(), dense_limit);
}

KrigingModel::KrigingModel(KernelPtr kernel, DesignSet design, GramMatrix gram)
    : kernel_(std::move(kernel)), design_(std::move(design)), gram_(std::move(gram)) {}

KrigingModel fit(KernelPtr kernel, const DesignSet& design, const Eigen::VectorXd& observations,
                 double nugget, std::optional<GramStorage> storage) {
  if (!kernel) throw ValidationError("fit requires a kernel");
  if (!(nugget >= 0.0) || !std::isfinite(nugget)) {
    throw ValidationError("nugget lambda must be finite and >= 0");
  }
  const auto n = static_cast<Eigen::Index>(design.size());
  if (n == 0) throw ValidationError("fit requires at least one design point");
  if (observations.size() != n) {
    throw ValidationError("observation vector has length " + std::to_string(observations.size()) +
                          " but the design has " + std::to_string(n) + " points");
  }
  if (!observations.allFinite()) throw ValidationError("observations must be finite");

  GramMatrix gram = assemble_gram(*kernel, design, storage);
  Eigen::MatrixXd system = gram.to_dense();
  system.diagonal().array() += nugget;

  KrigingModel model(std::move(kernel), design, std::move(gram));
  model.nugget_ = nugget;
  model.observations_ = observations;
  model.factor_.compute(system);

  const double max_diag = system.diagonal().maxCoeff();
  const double threshold = static_cast<double>(std::max<Eigen::Index>(n, 16)) * 1e-14 * max_diag;
  double min_pivot = -1.0;
  if (model.factor_.info() == Eigen::Success) {
    min_pivot = model.factor_.matrixLLT().diagonal().array().square().minCoeff();
  }
  if (!(max_diag > 0.0) || model.factor_.info() != Eigen::Success || !(min_pivot > threshold)) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
    const double worst = ldlt.vectorD().minCoeff();
    const double suggested = 10.0 * std::max(std::abs(worst), threshold);  // heuristic
    std::ostringstream msg;
    msg << "K + lambda*I (n = " << n << ", lambda = " << nugget
        << ") is not numerically positive definite: smallest pivot " << worst
        << " vs threshold " << threshold << "; try lambda >= " << suggested;
    throw FactorizationFailed(msg.str(), suggested);
  }

  Eigen::VectorXd alpha = model.factor_.solve(observations);
  const Eigen::VectorXd correction = model.factor_.solve(observations - system * alpha);
  alpha += correction;
  model.coefficients_ = alpha;
  const double scale = observations.norm();
  const double misfit = (system * alpha - observations).norm();
  model.relative_residual_ = scale > 0.0 ? misfit / scale : misfit;
  return model;
}

double KrigingModel::predict_mean(const Point& x) const {
  const auto& points = design_.points();
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += kernel_->eval(x, points[i]) * coefficients_(static_cast<Eigen::Index>(i));
  }
  return total;
}

Eigen::VectorXd KrigingModel::predict_mean(std::span<const Point> xs) const {
  return kernel_->combine(xs, design_.points(), coefficients_);
}

double KrigingModel::variance_from(const Point& x, const Eigen::VectorXd& k) const {
  const double prior = kernel_->eval(x, x);
  const Eigen::VectorXd v = factor_.matrixL().solve(k);
  const double variance = prior - v.squaredNorm();
  if (variance >= 0.0) return variance;
  if (variance >= -1e-8 * prior) return 0.0;
  std::ostringstream msg;
  msg << "predictive variance " << variance << " below -1e-8 * Phi(x,x) = " << -1e-8 * prior;
  throw NumericalBreakdown(msg.str());
}

double KrigingModel::predict_variance(const Point& x) const {
  const auto& points = design_.points();
  Eigen::VectorXd k(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    k(static_cast<Eigen::Index>(i)) = kernel_->eval(x, points[i]);
  }
  return variance_from(x, k);
}

Eigen::VectorXd KrigingModel::predict_variance(std::span<const Point> xs) const {
  const Eigen::MatrixXd cross = kernel_->cross_covariance(xs, design_.points());
  Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out(row) = variance_from(xs[i], cross.row(row).transpose());
  }
  return out;
}

Eigen::VectorXd KrigingModel::residual_on_design() const {
  return observations_ - gram_.to_dense() * coefficients_;
}

double KrigingModel::rkhs_norm_sq() const {
  return coefficients_.dot(gram_.to_dense() * coefficients_);
}

}  // namespace miskrige
