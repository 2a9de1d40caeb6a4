#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "json.hpp"
#include "miskrige/fem.hpp"
#include "miskrige/geometry.hpp"
#include "miskrige/wavelet.hpp"

namespace miskrige {

struct MaternSpec {
  double sigma = 1.0;  // marginal standard deviation
  double nu = 1.5;     // smoothness
  double kappa = 1.0;  // inverse lengthscale
  int dim = 1;
};

/// Truncated trigonometric Karhunen-Loeve kernel on [0,1].
struct KLTrigSpec {
  int s = 1;      // Sobolev exponent
  int terms = 0;  // truncation N
};

/// Daubechies multiscale kernel on the real line, d = 1.
struct WaveletSpec {
  double s = 1.5;      // scale exponent, 1/2 < s <= p
  int level = 0;       // finest level N
  int order = 2;       // Daubechies order p
  int resolution = 12; // table resolution J
};

/// Lagrange finite elements on [0,1].
struct FemSpec {
  int mesh = 16;  // N
  int degree = 1; // p
};

using KernelSpec = std::variant<MaternSpec, KLTrigSpec, WaveletSpec, FemSpec>;

/// "matern", "kl-trig", "wavelet" or "fem".
std::string family_name(const KernelSpec& spec);
/// Throws ValidationError describing the first violated constraint.
void validate(const KernelSpec& spec);
/// Sobolev index of the kernel's native space.
double nominal_smoothness(const KernelSpec& spec);
/// Point dimension the kernel accepts.
std::size_t kernel_dim(const KernelSpec& spec);

nlohmann::json to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const nlohmann::json& j);

/// Immutable covariance kernel. Evaluation is thread-safe.
class Kernel {
 public:
  virtual ~Kernel() = default;

  /// Phi(x, y). Arguments are put in a canonical order before evaluation, so the
  /// result is exactly symmetric.
  double eval(const Point& x, const Point& y) const;
  double operator()(const Point& x, const Point& y) const { return eval(x, y); }

  const KernelSpec& spec() const { return spec_; }
  double nominal_smoothness() const { return miskrige::nominal_smoothness(spec_); }
  std::size_t dim() const { return kernel_dim(spec_); }

  /// Phi(x, y) = 0 whenever |x - y| >= the radius, if the kernel has one.
  virtual std::optional<double> support_radius() const { return std::nullopt; }

  /// Symmetric matrix [Phi(x_i, x_j)]: upper triangle computed, lower mirrored.
  virtual Eigen::MatrixXd gram(std::span<const Point> points) const;
  /// Matrix [Phi(x_i, y_j)].
  virtual Eigen::MatrixXd cross_covariance(std::span<const Point> xs,
                                           std::span<const Point> ys) const;
  /// cross_covariance(xs, ys) * weights without storing the matrix.
  virtual Eigen::VectorXd combine(std::span<const Point> xs, std::span<const Point> ys,
                                  const Eigen::VectorXd& weights) const;

 protected:
  explicit Kernel(KernelSpec spec);
  virtual double evaluate(const Point& x, const Point& y) const = 0;

 private:
  KernelSpec spec_;
};

using KernelPtr = std::shared_ptr<const Kernel>;

/// Validates the spec and precomputes tables or factorizations.
KernelPtr make_kernel(const KernelSpec& spec);

double matern_eval(const MaternSpec& spec, const Point& x, const Point& y);
/// Stationary cosine form 1 + sum_k w_k cos(2 pi k (x - y)).
double kl_trig_eval(const KLTrigSpec& spec, double x, double y);
/// Product form 1 + sum_k w_k (cos cos + sin sin).
double kl_trig_eval_series(const KLTrigSpec& spec, double x, double y);
/// Eigenvalue weight (1 + 4 pi^2 k^2)^{-s}.
double kl_trig_weight(int s, int k);
double wavelet_kernel_eval(const WaveletSpec& spec, const WaveletTable& table, double x,
                           double y);

}  // namespace miskrige
