#include "miskrige/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "miskrige/error.hpp"

namespace miskrige {

namespace {

constexpr double kErrorFloor = 1e-10;

std::vector<double> axis_nodes(double a, double b, std::size_t count) {
  std::vector<double> out(count);
  const double step = (b - a) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = a + step * static_cast<double>(i);
  out.back() = b;
  return out;
}

std::vector<double> axis_weights(double a, double b, std::size_t count) {
  std::vector<double> out(count);
  const double step = (b - a) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const double w = (i == 0 || i + 1 == count) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    out[i] = w * step / 3.0;
  }
  return out;
}

std::vector<double> axis_inset(double a, double b, std::size_t count) {
  std::vector<double> out(count);
  const double step = (b - a) / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = a + step * (static_cast<double>(i) + 0.5);
  return out;
}

}  // namespace

void check_simpson_resolution(std::size_t dim, std::size_t count) {
  const std::size_t minimum = dim == 1 ? 1001 : 201;
  if (count < minimum || count % 2 == 0) {
    throw ValidationError("Simpson resolution M = " + std::to_string(count) +
                          " must be odd and >= " + std::to_string(minimum));
  }
}

void check_sup_resolution(std::size_t dim, std::size_t count) {
  const std::size_t minimum = dim == 1 ? 1000 : 201;
  if (count < minimum) {
    throw ValidationError("sup-norm resolution M = " + std::to_string(count) + " must be >= " +
                          std::to_string(minimum));
  }
}

std::vector<Point> simpson_nodes(const Region& region, std::size_t count) {
  const Box& box = region.omega();
  const auto xs = axis_nodes(box.lower[0], box.upper[0], count);
  std::vector<Point> out;
  if (region.dim() == 1) {
    for (double x : xs) out.emplace_back(x);
    return out;
  }
  const auto ys = axis_nodes(box.lower[1], box.upper[1], count);
  out.reserve(count * count);
  for (double x : xs) {
    for (double y : ys) out.emplace_back(x, y);
  }
  return out;
}

std::vector<double> simpson_weights(const Region& region, std::size_t count) {
  const Box& box = region.omega();
  const auto wx = axis_weights(box.lower[0], box.upper[0], count);
  if (region.dim() == 1) return wx;
  const auto wy = axis_weights(box.lower[1], box.upper[1], count);
  std::vector<double> out;
  out.reserve(count * count);
  for (double a : wx) {
    for (double b : wy) out.push_back(a * b);
  }
  return out;
}

std::vector<Point> inset_grid(const Region& region, std::size_t count) {
  const Box& box = region.omega();
  const auto xs = axis_inset(box.lower[0], box.upper[0], count);
  std::vector<Point> out;
  if (region.dim() == 1) {
    for (double x : xs) out.emplace_back(x);
    return out;
  }
  const auto ys = axis_inset(box.lower[1], box.upper[1], count);
  out.reserve(count * count);
  for (double x : xs) {
    for (double y : ys) out.emplace_back(x, y);
  }
  return out;
}

double l2_norm_sampled(const std::vector<double>& differences, const std::vector<double>& weights) {
  if (differences.size() != weights.size()) {
    throw ValidationError("sample and weight counts differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < differences.size(); ++i) {
    total += weights[i] * differences[i] * differences[i];
  }
  return std::sqrt(std::max(total, 0.0));
}

double linf_norm_sampled(const std::vector<double>& differences) {
  double worst = 0.0;
  for (double d : differences) worst = std::max(worst, std::abs(d));
  return worst;
}

double l2_error(const ScalarField& f, const ScalarField& g, const Region& region,
                std::size_t count) {
  check_simpson_resolution(region.dim(), count);
  const auto nodes = simpson_nodes(region, count);
  std::vector<double> diff(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) diff[i] = f(nodes[i]) - g(nodes[i]);
  return l2_norm_sampled(diff, simpson_weights(region, count));
}

double linf_error(const ScalarField& f, const ScalarField& g, const Region& region,
                  std::size_t count) {
  check_sup_resolution(region.dim(), count);
  const auto nodes = inset_grid(region, count);
  std::vector<double> diff(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) diff[i] = f(nodes[i]) - g(nodes[i]);
  return linf_norm_sampled(diff);
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
  RateFit fit;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [n, error] = pairs[i];
    if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("rate fit needs positive n");
    if (i > 0 && !(n > pairs[i - 1].first)) {
      throw ValidationError("rate fit needs strictly increasing n");
    }
    if (!(error >= 0.0) || !std::isfinite(error)) {
      throw ValidationError("rate fit needs finite nonnegative errors");
    }
    if (error < kErrorFloor) {
      std::ostringstream msg;
      msg << "excluded n = " << n << ": error " << error << " below the 1e-10 floor";
      fit.warnings.push_back(msg.str());
      continue;
    }
    fit.points.emplace_back(n, error);
  }
  const std::size_t m = fit.points.size();
  if (m < 4) {
    throw ValidationError("rate fit needs at least 4 usable (n, error) pairs, got " +
                          std::to_string(m));
  }
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& [n, e] : fit.points) {
    mean_x += std::log(n);
    mean_y += std::log(e);
  }
  mean_x /= static_cast<double>(m);
  mean_y /= static_cast<double>(m);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [n, e] : fit.points) {
    const double dx = std::log(n) - mean_x;
    const double dy = std::log(e) - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    double sse = 0.0;
    for (const auto& [n, e] : fit.points) {
      const double r = std::log(e) - (fit.intercept + fit.slope * std::log(n));
      sse += r * r;
    }
    fit.r_squared = std::clamp(1.0 - sse / syy, 0.0, 1.0);
  }
  return fit;
}

nlohmann::json to_json(const RateFit& fit) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& [n, e] : fit.points) points.push_back({n, e});
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r_squared", fit.r_squared},
          {"points", points},
          {"warnings", fit.warnings}};
}

}  // namespace miskrige
