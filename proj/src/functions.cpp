#include "miskrige/functions.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "miskrige/error.hpp"
#include "miskrige/random.hpp"

namespace miskrige {

namespace {

constexpr double kDecayMargin = 0.05;

double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double rise = std::exp(-1.0 / t);
  const double fall = std::exp(-1.0 / (1.0 - t));
  return rise / (rise + fall);
}

}  // namespace

double FourierCoefficients::eval(double x) const {
  const double angle = 2.0 * std::numbers::pi * x / period;
  double total = 0.0;
  // Smallest terms first.
  for (std::size_t k = a.size(); k >= 1; --k) {
    const double t = static_cast<double>(k) * angle;
    total += a[k - 1] * std::cos(t) + b[k - 1] * std::sin(t);
  }
  return a0 + total;
}

double FourierCoefficients::sobolev_norm_sq(double s) const {
  double total = 0.0;
  const double scale = 4.0 * std::numbers::pi * std::numbers::pi / (period * period);
  for (std::size_t k = a.size(); k >= 1; --k) {
    const double kk = static_cast<double>(k);
    total += (a[k - 1] * a[k - 1] + b[k - 1] * b[k - 1]) * std::pow(1.0 + scale * kk * kk, s);
  }
  return a0 * a0 + total;
}

TargetFunction::TargetFunction(Evaluator evaluator, std::optional<double> smoothness,
                               bool periodic, std::string description, std::size_t dim)
    : evaluator_(std::make_shared<const Evaluator>(std::move(evaluator))),
      smoothness_(smoothness),
      periodic_(periodic),
      description_(std::move(description)),
      dim_(dim) {}

TargetFunction fourier_series_target(FourierCoefficients coefficients,
                                     std::optional<double> smoothness) {
  if (coefficients.a.size() != coefficients.b.size()) {
    throw ValidationError("Fourier target needs equally many cosine and sine coefficients");
  }
  if (!(coefficients.period > 0.0)) throw ValidationError("Fourier period must be positive");
  auto shared = std::make_shared<const FourierCoefficients>(coefficients);
  std::ostringstream description;
  description << "Fourier series with " << coefficients.a.size() << " terms";
  TargetFunction f([shared](const Point& x) { return shared->eval(x[0]); }, smoothness, true,
                   description.str());
  f.coefficients_ = std::move(coefficients);
  f.spec_ = {{"kind", "fourier-coefficients"}, {"terms", shared->a.size()}};
  return f;
}

TargetFunction fourier_target(double s0, int terms, std::uint64_t seed, double period) {
  if (!(s0 > 0.5) || !std::isfinite(s0)) {
    throw ValidationError("Fourier target smoothness s0 must exceed 1/2");
  }
  if (terms < 1) throw ValidationError("Fourier target needs K >= 1 terms");
  Rng rng(seed);
  FourierCoefficients c;
  c.period = period;
  c.a.resize(static_cast<std::size_t>(terms));
  c.b.resize(static_cast<std::size_t>(terms));
  for (int k = 1; k <= terms; ++k) {
    const double magnitude = std::pow(static_cast<double>(k), -(s0 + 0.5 + kDecayMargin));
    c.a[k - 1] = rng.sign() * magnitude;
    c.b[k - 1] = rng.sign() * magnitude;
  }
  TargetFunction f = fourier_series_target(std::move(c), s0);
  f.spec_ = {{"kind", "fourier"}, {"s0", s0}, {"K", terms}, {"seed", seed}, {"period", period}};
  return f;
}

TargetFunction truncated_power_target(int m, double c) {
  if (m < 1) throw ValidationError("truncated power exponent m must be >= 1");
  if (!std::isfinite(c)) throw ValidationError("truncated power knot must be finite");
  std::ostringstream description;
  description << "max(0, x - " << c << ")^" << m;
  TargetFunction f(
      [m, c](const Point& x) {
        const double t = x[0] - c;
        return t > 0.0 ? std::pow(t, m) : 0.0;
      },
      m + 0.45, false, description.str());
  f.spec_ = {{"kind", "truncated-power"}, {"m", m}, {"c", c}};
  return f;
}

TargetFunction fractional_power_target(double exponent, double c) {
  if (!(exponent > 0.5) || !std::isfinite(exponent)) {
    throw ValidationError("fractional power exponent must exceed 1/2");
  }
  if (!std::isfinite(c)) throw ValidationError("fractional power knot must be finite");
  std::ostringstream description;
  description << "max(0, x - " << c << ")^" << exponent;
  TargetFunction f(
      [exponent, c](const Point& x) {
        const double t = x[0] - c;
        return t > 0.0 ? std::pow(t, exponent) : 0.0;
      },
      exponent + 0.45, false, description.str());
  f.spec_ = {{"kind", "fractional-power"}, {"a", exponent}, {"c", c}};
  return f;
}

SmoothKind parse_smooth_kind(const std::string& name) {
  if (name == "sine") return SmoothKind::sine;
  if (name == "gaussian-bump") return SmoothKind::gaussian_bump;
  throw ValidationError("unknown smooth target '" + name + "' (expected sine or gaussian-bump)");
}

TargetFunction smooth_target(SmoothKind kind, std::size_t dim) {
  if (dim != 1 && dim != 2) throw ValidationError("smooth targets exist for d = 1 or 2");
  if (kind == SmoothKind::sine) {
    TargetFunction f(
        [dim](const Point& x) {
          double value = std::sin(2.0 * std::numbers::pi * x[0]);
          if (dim == 2) value *= std::sin(2.0 * std::numbers::pi * x[1]);
          return value;
        },
        std::nullopt, true, dim == 1 ? "sin(2 pi x)" : "sin(2 pi x) sin(2 pi y)", dim);
    f.spec_ = {{"kind", "sine"}};
    return f;
  }
  TargetFunction f(
      [dim](const Point& x) {
        double exponent = (x[0] - 0.5) * (x[0] - 0.5);
        if (dim == 2) exponent += (x[1] - 0.5) * (x[1] - 0.5);
        return std::exp(-exponent / 0.02);
      },
      std::nullopt, false, "exp(-|x - 0.5|^2 / 0.02)", dim);
  f.spec_ = {{"kind", "gaussian-bump"}};
  return f;
}

double bump_window_value(const Region& region, double x) {
  const double a = region.omega().lower[0];
  const double b = region.omega().upper[0];
  const double left = 0.5 * (region.ambient().lower[0] + a);
  const double right = 0.5 * (b + region.ambient().upper[0]);
  if (x >= a && x <= b) return 1.0;
  if (x <= left || x >= right) return 0.0;
  if (x < a) return smoothstep((x - left) / (a - left));
  return smoothstep((right - x) / (right - b));
}

TargetFunction bump_window(const TargetFunction& f, const Region& region) {
  if (region.dim() != 1) throw ValidationError("bump_window is defined for intervals only");
  if (!region.compactly_contained()) {
    throw ValidationError("bump_window needs Omega strictly inside D");
  }
  TargetFunction windowed(
      [f, region](const Point& x) {
        const double eta = bump_window_value(region, x[0]);
        return eta == 0.0 ? 0.0 : eta * f(x);
      },
      f.smoothness(), true, "windowed " + f.description());
  return windowed;
}

TargetFunction target_from_json(const nlohmann::json& spec, const Region& region) {
  try {
    const std::string kind = spec.at("kind").get<std::string>();
    std::optional<TargetFunction> f;
    if (kind == "fourier") {
      f = fourier_target(spec.at("s0").get<double>(), spec.value("K", 500),
                         spec.value("seed", std::uint64_t{1}), spec.value("period", 1.0));
    } else if (kind == "truncated-power") {
      f = truncated_power_target(spec.at("m").get<int>(), spec.value("c", 0.5));
    } else if (kind == "fractional-power") {
      f = fractional_power_target(spec.at("a").get<double>(), spec.value("c", 0.5));
    } else if (kind == "sine" || kind == "gaussian-bump") {
      f = smooth_target(parse_smooth_kind(kind), region.dim());
    } else {
      throw ValidationError("unknown target kind '" + kind + "'");
    }
    if (spec.value("window", false)) f = bump_window(*f, region);
    f->spec_ = spec;
    return *f;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed target spec: ") + e.what());
  }
}

}  // namespace miskrige
