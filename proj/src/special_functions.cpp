#include "miskrige/special_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "miskrige/error.hpp"

namespace miskrige {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 10000;

// Taylor coefficients of 1/Gamma(z) about 0 (c[k] multiplies z^k).
constexpr std::array<double, 17> kRecipGamma = {
    0.0,
    1.0,
    0.57721566490153286,
    -0.65587807152025388,
    -0.042002635034095236,
    0.16653861138229149,
    -0.042197734555544337,
    -0.0096219715278769736,
    0.0072189432466630995,
    -0.0011651675918590651,
    -0.00021524167411495097,
    0.00012805028238811619,
    -2.0134854780788239e-5,
    -1.2504934821426707e-6,
    1.1330272319816959e-6,
    -2.0563384169776071e-7,
    6.1160951044814158e-9,
};

// gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu), accurate for small mu.
double temme_gam1(double mu, double gampl, double gammi) {
  if (std::abs(mu) > 0.1) return (gammi - gampl) / (2.0 * mu);
  // 1/Gamma(1+mu) = sum_k c[k+1] mu^k; the odd part gives -gam1.
  const double mu2 = mu * mu;
  double acc = 0.0;
  double pw = 1.0;
  for (std::size_t k = 2; k < kRecipGamma.size(); k += 2) {
    acc += kRecipGamma[k] * pw;
    pw *= mu2;
  }
  return -acc;
}

}  // namespace

double bessel_k(double nu, double x) {
  if (!(nu >= 0.0) || !(x > 0.0)) throw ValidationError("bessel_k: need nu >= 0 and x > 0");
  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;  // |mu| <= 1/2
  const double mu2 = mu * mu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  double kmu = 0.0;
  double k1 = 0.0;

  if (x < 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = std::numbers::pi * mu;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const double gampl = 1.0 / std::tgamma(1.0 + mu);
    const double gammi = 1.0 / std::tgamma(1.0 - mu);
    const double gam1 = temme_gam1(mu, gampl, gammi);
    const double gam2 = 0.5 * (gammi + gampl);
    double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl;
    double q = 0.5 / (e * gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
      const double di = i;
      ff = (di * ff + p + q) / (di * di - mu2);
      c *= d / di;
      p /= di - mu;
      q /= di + mu;
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - di * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    if (i > kMaxIter) throw NumericalError("bessel_k: series did not converge");
    kmu = sum;
    k1 = sum1 * xi2;
  } else {
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
      a -= 2.0 * i;
      c = -a * c / (i + 1.0);
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < kEps) break;
    }
    if (i > kMaxIter) throw NumericalError("bessel_k: continued fraction did not converge");
    h = a1 * h;
    kmu = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) / s;
    k1 = kmu * (mu + x + 0.5 - h) * xi;
  }

  for (int i = 1; i <= nl; ++i) {
    const double next = (mu + i) * xi2 * k1 + kmu;
    kmu = k1;
    k1 = next;
  }
  return kmu;
}

bool is_half_integer(double nu) {
  const double twice = 2.0 * nu;
  return nu > 0.0 && nu <= 50.5 && twice == std::floor(twice) &&
         static_cast<long long>(twice) % 2 == 1;
}

double matern_correlation_bessel(double nu, double z) {
  if (z == 0.0) return 1.0;
  // exp(-z) underflows long before this.
  if (z > 700.0) return 0.0;
  const double log_val = (1.0 - nu) * std::numbers::ln2 - std::lgamma(nu) + nu * std::log(z) +
                         std::log(bessel_k(nu, z));
  return std::exp(log_val);
}

double matern_correlation_half_integer(int p, double z) {
  if (p < 0) throw ValidationError("matern_correlation_half_integer: p must be nonnegative");
  // term_i = (p+i)!/(i!(p-i)!) (2z)^{p-i} p!/(2p)!, built from i = p downwards.
  double term = 1.0;  // i = p: (2p)!/p! * p!/(2p)! = 1
  double sum = term;
  const double two_z = 2.0 * z;
  for (int i = p; i > 0; --i) {
    // term_{i-1}/term_i = 2z * i / ((p+i)(p-i+1))
    term *= two_z * static_cast<double>(i) / (static_cast<double>(p + i) * (p - i + 1));
    sum += term;
  }
  return std::exp(-z) * sum;
}

}  // namespace miskrige
