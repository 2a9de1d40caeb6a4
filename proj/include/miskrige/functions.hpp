#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "miskrige/geometry.hpp"

namespace miskrige {

/// f(x) = a0 + sum_k a_k cos(2 pi k x / P) + b_k sin(2 pi k x / P).
struct FourierCoefficients {
  double a0 = 0.0;
  std::vector<double> a;  // a[k-1] multiplies cos(2 pi k x / P)
  std::vector<double> b;
  double period = 1.0;

  double eval(double x) const;
  /// a0^2 + sum (a_k^2 + b_k^2)(1 + 4 pi^2 k^2 / P^2)^s.
  double sobolev_norm_sq(double s) const;
};

enum class SmoothKind { sine, gaussian_bump };

/// Deterministic target with a declared Sobolev smoothness. Smooth targets carry a
/// tag instead of a numeric smoothness.
class TargetFunction {
 public:
  using Evaluator = std::function<double(const Point&)>;

  TargetFunction(Evaluator evaluator, std::optional<double> smoothness, bool periodic,
                 std::string description, std::size_t dim = 1);

  double operator()(const Point& x) const { return (*evaluator_)(x); }
  double operator()(double x) const { return (*evaluator_)(Point(x)); }

  /// Declared s0, or nullopt for the smooth tag.
  std::optional<double> smoothness() const { return smoothness_; }
  bool is_smooth() const { return !smoothness_.has_value(); }
  bool periodic() const { return periodic_; }
  std::size_t dim() const { return dim_; }
  const std::string& description() const { return description_; }
  /// Set for Fourier-series targets.
  const std::optional<FourierCoefficients>& coefficients() const { return coefficients_; }

  /// Kind + parameters + seed; coefficients are reproducible and not stored.
  const nlohmann::json& spec() const { return spec_; }

 private:
  friend TargetFunction fourier_series_target(FourierCoefficients, std::optional<double>);
  friend TargetFunction fourier_target(double, int, std::uint64_t, double);
  friend TargetFunction truncated_power_target(int, double);
  friend TargetFunction fractional_power_target(double, double);
  friend TargetFunction smooth_target(SmoothKind, std::size_t);
  friend TargetFunction target_from_json(const nlohmann::json&, const Region&);

  std::shared_ptr<const Evaluator> evaluator_;
  std::optional<double> smoothness_;
  bool periodic_;
  std::string description_;
  std::size_t dim_;
  std::optional<FourierCoefficients> coefficients_;
  nlohmann::json spec_;
};

/// Random-sign coefficients a_k, b_k = +-k^{-(s0 + 0.55)}, k = 1..terms, a0 = 0,
/// periodic with the given period. Lies in H^{s0} strictly.
TargetFunction fourier_target(double s0, int terms, std::uint64_t seed, double period = 1.0);
/// Target from explicit coefficients with an optional declared smoothness.
TargetFunction fourier_series_target(FourierCoefficients coefficients,
                                     std::optional<double> smoothness = std::nullopt);
/// max(0, x - c)^m with declared s0 = m + 0.45.
TargetFunction truncated_power_target(int m, double c);
/// max(0, x - c)^a for real a > 1/2: in H^s exactly for s < a + 1/2, declared
/// s0 = a + 0.45. Its kink-free but unbounded-derivative knot makes the sup error
/// decay at the worst-case rate for its class.
TargetFunction fractional_power_target(double exponent, double c);

SmoothKind parse_smooth_kind(const std::string& name);
/// sin(2 pi x) or exp(-(x - 0.5)^2 / 0.02); in d = 2 the tensor product over the axes.
TargetFunction smooth_target(SmoothKind kind, std::size_t dim = 1);

/// Smooth cutoff: 1 on Omega, 0 outside the interval whose ends are the midpoints
/// between Omega and D, exp(-1/t) transitions in between. 1-D only.
double bump_window_value(const Region& region, double x);
/// x -> eta(x) f(x).
TargetFunction bump_window(const TargetFunction& f, const Region& region);

/// Builds a target from {"kind": ...}. Kinds: "fourier" (s0, K, seed, period),
/// "truncated-power" (m, c), "fractional-power" (a, c), "sine", "gaussian-bump". With "window": true the
/// result is passed through bump_window on the region.
TargetFunction target_from_json(const nlohmann::json& spec, const Region& region);

}  // namespace miskrige
