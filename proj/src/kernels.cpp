#include "miskrige/kernels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "miskrige/error.hpp"
#include "miskrige/parallel.hpp"
#include "miskrige/special_functions.hpp"

namespace miskrige {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

bool ordered_before(const Point& a, const Point& b) {
  if (a[0] != b[0]) return a[0] < b[0];
  return a.dim() == 2 && a[1] < b[1];
}

void check_unit(double x, const char* family) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream msg;
    msg << family << " kernel argument " << x << " lies outside [0,1]";
    throw ValidationError(msg.str());
  }
}

class MaternKernel final : public Kernel {
 public:
  explicit MaternKernel(const MaternSpec& spec) : Kernel(spec), spec_(spec) {}

 protected:
  double evaluate(const Point& x, const Point& y) const override {
    return matern_eval(spec_, x, y);
  }

 private:
  MaternSpec spec_;
};

class KLTrigKernel final : public Kernel {
 public:
  explicit KLTrigKernel(const KLTrigSpec& spec) : Kernel(spec), spec_(spec) {}

  // Rank 2N+1: fold the weights into Fourier sums over ys once, then expand at xs.
  Eigen::VectorXd combine(std::span<const Point> xs, std::span<const Point> ys,
                          const Eigen::VectorXd& weights) const override {
    if (static_cast<Eigen::Index>(ys.size()) != weights.size()) {
      throw ValidationError("combine needs one weight per point");
    }
    const double tau = 2.0 * std::numbers::pi;
    const int terms = spec_.terms;
    std::vector<double> cos_sum(static_cast<std::size_t>(terms) + 1, 0.0);
    std::vector<double> sin_sum(static_cast<std::size_t>(terms) + 1, 0.0);
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double y = ys[j][0];
      check_unit(y, "kl-trig");
      const double w = weights(static_cast<Eigen::Index>(j));
      for (int k = 1; k <= terms; ++k) {
        cos_sum[static_cast<std::size_t>(k)] += w * std::cos(tau * k * y);
        sin_sum[static_cast<std::size_t>(k)] += w * std::sin(tau * k * y);
      }
    }
    for (int k = 1; k <= terms; ++k) {
      const double lambda = kl_trig_weight(spec_.s, k);
      cos_sum[static_cast<std::size_t>(k)] *= lambda;
      sin_sum[static_cast<std::size_t>(k)] *= lambda;
    }
    for (const Point& x : xs) check_unit(x[0], "kl-trig");
    const double mean = weights.sum();
    Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
    parallel_for(xs.size(), [&](std::size_t i) {
      const double x = xs[i][0];
      double total = 0.0;
      for (int k = terms; k >= 1; --k) {
        total += cos_sum[static_cast<std::size_t>(k)] * std::cos(tau * k * x) +
                 sin_sum[static_cast<std::size_t>(k)] * std::sin(tau * k * x);
      }
      out(static_cast<Eigen::Index>(i)) = mean + total;
    });
    return out;
  }

 protected:
  double evaluate(const Point& x, const Point& y) const override {
    return kl_trig_eval(spec_, x[0], y[0]);
  }

 private:
  KLTrigSpec spec_;
};

class WaveletKernel final : public Kernel {
 public:
  explicit WaveletKernel(const WaveletSpec& spec)
      : Kernel(spec),
        spec_(spec),
        table_(std::make_shared<WaveletTable>(build_wavelet_table(spec.order, spec.resolution))) {}

  std::optional<double> support_radius() const override {
    return static_cast<double>(table_->support());
  }

 protected:
  double evaluate(const Point& x, const Point& y) const override {
    return wavelet_kernel_eval(spec_, *table_, x[0], y[0]);
  }

 private:
  WaveletSpec spec_;
  std::shared_ptr<const WaveletTable> table_;
};

class FemKernel final : public Kernel {
 public:
  explicit FemKernel(const FemSpec& spec)
      : Kernel(spec), assembly_(fem_assemble(spec.mesh, spec.degree)) {}

  Eigen::MatrixXd gram(std::span<const Point> points) const override {
    const SparseMatrix basis = basis_matrix(points);
    Eigen::MatrixXd out = basis.transpose() * solve_columns(basis);
    const auto n = out.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) out(j, i) = out(i, j);
    }
    return out;
  }

  Eigen::MatrixXd cross_covariance(std::span<const Point> xs,
                                   std::span<const Point> ys) const override {
    return basis_matrix(xs).transpose() * solve_columns(basis_matrix(ys));
  }

  Eigen::VectorXd combine(std::span<const Point> xs, std::span<const Point> ys,
                          const Eigen::VectorXd& weights) const override {
    const Eigen::VectorXd nodal = assembly_.solve(basis_matrix(ys) * weights);
    return basis_matrix(xs).transpose() * nodal;
  }

 protected:
  double evaluate(const Point& x, const Point& y) const override {
    return fem_kernel_eval(assembly_, x[0], y[0]);
  }

 private:
  // Column j holds B(points[j]).
  SparseMatrix basis_matrix(std::span<const Point> points) const {
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(points.size() * static_cast<std::size_t>(assembly_.degree() + 1));
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (points[j].dim() != 1) throw ValidationError("FEM kernel expects 1-D points");
      for (const auto& [index, value] : assembly_.basis(points[j][0])) {
        entries.emplace_back(index, static_cast<int>(j), value);
      }
    }
    SparseMatrix out(assembly_.node_count(), static_cast<Eigen::Index>(points.size()));
    out.setFromTriplets(entries.begin(), entries.end());
    return out;
  }

  Eigen::MatrixXd solve_columns(const SparseMatrix& rhs) const {
    Eigen::MatrixXd out(rhs.rows(), rhs.cols());
    for (Eigen::Index j = 0; j < rhs.cols(); ++j) {
      out.col(j) = assembly_.solve(Eigen::VectorXd(rhs.col(j)));
    }
    return out;
  }

  FemAssembly assembly_;
};

}  // namespace

std::string family_name(const KernelSpec& spec) {
  return std::visit(Overloaded{[](const MaternSpec&) { return std::string("matern"); },
                               [](const KLTrigSpec&) { return std::string("kl-trig"); },
                               [](const WaveletSpec&) { return std::string("wavelet"); },
                               [](const FemSpec&) { return std::string("fem"); }},
                    spec);
}

void validate(const KernelSpec& spec) {
  std::visit(
      Overloaded{
          [](const MaternSpec& m) {
            if (!(m.sigma > 0.0) || !std::isfinite(m.sigma)) {
              throw ValidationError("matern sigma must be positive");
            }
            if (!(m.nu > 0.0) || !std::isfinite(m.nu)) {
              throw ValidationError("matern nu must be positive");
            }
            if (!(m.kappa > 0.0) || !std::isfinite(m.kappa)) {
              throw ValidationError("matern kappa must be positive");
            }
            if (m.dim != 1 && m.dim != 2) throw ValidationError("matern d must be 1 or 2");
          },
          [](const KLTrigSpec& k) {
            if (k.s < 1) throw ValidationError("kl-trig s must be an integer >= 1");
            if (k.terms < 0) throw ValidationError("kl-trig truncation N must be >= 0");
          },
          [](const WaveletSpec& w) {
            if (w.order < 1 || w.order > 4) throw ValidationError("wavelet order p must be in 1..4");
            if (w.level < 0 || w.level > 50) throw ValidationError("wavelet level N must be in 0..50");
            if (w.resolution < 8 || w.resolution > 16) {
              throw ValidationError("wavelet table resolution J must be in 8..16");
            }
            if (!(w.s > 0.5) || !(w.s <= w.order)) {
              std::ostringstream msg;
              msg << "wavelet exponent s = " << w.s << " must satisfy 1/2 < s <= p = " << w.order;
              throw ValidationError(msg.str());
            }
          },
          [](const FemSpec& f) {
            if (f.mesh < 1) throw ValidationError("fem mesh count N must be >= 1");
            if (f.degree != 1 && f.degree != 2) throw ValidationError("fem degree p must be 1 or 2");
          }},
      spec);
}

double nominal_smoothness(const KernelSpec& spec) {
  return std::visit(Overloaded{[](const MaternSpec& m) { return m.nu + m.dim / 2.0; },
                               [](const KLTrigSpec& k) { return static_cast<double>(k.s); },
                               [](const WaveletSpec& w) { return w.s; },
                               [](const FemSpec&) { return 1.0; }},
                    spec);
}

std::size_t kernel_dim(const KernelSpec& spec) {
  if (const auto* m = std::get_if<MaternSpec>(&spec)) return static_cast<std::size_t>(m->dim);
  return 1;
}

nlohmann::json to_json(const KernelSpec& spec) {
  return std::visit(
      Overloaded{[](const MaternSpec& m) {
                   return nlohmann::json{{"family", "matern"}, {"sigma", m.sigma},
                                         {"nu", m.nu},         {"kappa", m.kappa},
                                         {"d", m.dim}};
                 },
                 [](const KLTrigSpec& k) {
                   return nlohmann::json{{"family", "kl-trig"}, {"s", k.s}, {"N", k.terms}};
                 },
                 [](const WaveletSpec& w) {
                   return nlohmann::json{{"family", "wavelet"}, {"s", w.s},
                                         {"N", w.level},        {"p", w.order},
                                         {"J", w.resolution}};
                 },
                 [](const FemSpec& f) {
                   return nlohmann::json{{"family", "fem"}, {"N", f.mesh}, {"p", f.degree}};
                 }},
      spec);
}

KernelSpec kernel_spec_from_json(const nlohmann::json& j) {
  try {
    const std::string family = j.at("family").get<std::string>();
    KernelSpec spec;
    if (family == "matern") {
      MaternSpec m;
      m.sigma = j.value("sigma", m.sigma);
      m.nu = j.at("nu").get<double>();
      m.kappa = j.value("kappa", m.kappa);
      m.dim = j.value("d", m.dim);
      spec = m;
    } else if (family == "kl-trig") {
      KLTrigSpec k;
      k.s = j.at("s").get<int>();
      k.terms = j.value("N", k.terms);
      spec = k;
    } else if (family == "wavelet") {
      WaveletSpec w;
      w.s = j.at("s").get<double>();
      w.level = j.value("N", w.level);
      w.order = j.value("p", w.order);
      w.resolution = j.value("J", w.resolution);
      spec = w;
    } else if (family == "fem") {
      FemSpec f;
      f.mesh = j.at("N").get<int>();
      f.degree = j.value("p", f.degree);
      spec = f;
    } else {
      throw ValidationError("unknown kernel family '" + family + "'");
    }
    validate(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed kernel spec: ") + e.what());
  }
}

Kernel::Kernel(KernelSpec spec) : spec_(std::move(spec)) { validate(spec_); }

double Kernel::eval(const Point& x, const Point& y) const {
  if (x.dim() != dim() || y.dim() != dim()) {
    throw ValidationError(family_name(spec_) + " kernel expects " + std::to_string(dim()) +
                          "-D points");
  }
  return ordered_before(y, x) ? evaluate(y, x) : evaluate(x, y);
}

Eigen::MatrixXd Kernel::gram(std::span<const Point> points) const {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd out(n, n);
  parallel_for(points.size(), [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = row; j < n; ++j) out(row, j) = eval(points[i], points[j]);
  });
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) out(j, i) = out(i, j);
  }
  return out;
}

Eigen::MatrixXd Kernel::cross_covariance(std::span<const Point> xs,
                                         std::span<const Point> ys) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
  parallel_for(xs.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = eval(xs[i], ys[j]);
    }
  });
  return out;
}

Eigen::VectorXd Kernel::combine(std::span<const Point> xs, std::span<const Point> ys,
                                const Eigen::VectorXd& weights) const {
  if (weights.size() != static_cast<Eigen::Index>(ys.size())) {
    throw ValidationError("weight vector length does not match the point count");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
  parallel_for(xs.size(), [&](std::size_t i) {
    double total = 0.0;
    for (std::size_t j = 0; j < ys.size(); ++j) {
      total += eval(xs[i], ys[j]) * weights(static_cast<Eigen::Index>(j));
    }
    out(static_cast<Eigen::Index>(i)) = total;
  });
  return out;
}

KernelPtr make_kernel(const KernelSpec& spec) {
  validate(spec);
  return std::visit(
      Overloaded{[](const MaternSpec& m) -> KernelPtr { return std::make_shared<MaternKernel>(m); },
                 [](const KLTrigSpec& k) -> KernelPtr {
                   return std::make_shared<KLTrigKernel>(k);
                 },
                 [](const WaveletSpec& w) -> KernelPtr {
                   return std::make_shared<WaveletKernel>(w);
                 },
                 [](const FemSpec& f) -> KernelPtr { return std::make_shared<FemKernel>(f); }},
      spec);
}

double matern_eval(const MaternSpec& spec, const Point& x, const Point& y) {
  const double z = spec.kappa * distance(x, y);
  const double variance = spec.sigma * spec.sigma;
  if (is_half_integer(spec.nu)) {
    return variance * matern_correlation_half_integer(static_cast<int>(spec.nu), z);
  }
  return variance * matern_correlation_bessel(spec.nu, z);
}

double kl_trig_weight(int s, int k) {
  const double base = 1.0 + 4.0 * std::numbers::pi * std::numbers::pi * k * k;
  return std::pow(base, -s);
}

double kl_trig_eval(const KLTrigSpec& spec, double x, double y) {
  check_unit(x, "kl-trig");
  check_unit(y, "kl-trig");
  const double angle = 2.0 * std::numbers::pi * (x - y);
  double total = 0.0;
  for (int k = spec.terms; k >= 1; --k) total += kl_trig_weight(spec.s, k) * std::cos(k * angle);
  return 1.0 + total;
}

double kl_trig_eval_series(const KLTrigSpec& spec, double x, double y) {
  check_unit(x, "kl-trig");
  check_unit(y, "kl-trig");
  const double tau = 2.0 * std::numbers::pi;
  double total = 0.0;
  for (int k = spec.terms; k >= 1; --k) {
    const double ax = tau * k * x;
    const double ay = tau * k * y;
    total += kl_trig_weight(spec.s, k) *
             (std::cos(ax) * std::cos(ay) + std::sin(ax) * std::sin(ay));
  }
  return 1.0 + total;
}

double wavelet_kernel_eval(const WaveletSpec& spec, const WaveletTable& table, double x,
                           double y) {
  if (table.order() != spec.order) {
    throw ValidationError("wavelet table order " + std::to_string(table.order()) +
                          " does not match kernel order " + std::to_string(spec.order));
  }
  const double lo = std::min(x, y);
  const double hi = std::max(x, y);
  const double reach = static_cast<double>(table.support());

  // Translates k with both points inside [k, k + 2p - 1] (scaled by 2^-j).
  double total = 0.0;
  for (double k = std::ceil(hi - reach); k <= std::floor(lo); k += 1.0) {
    total += table.phi(x - k) * table.phi(y - k);
  }
  for (int j = 0; j <= spec.level; ++j) {
    const double sx = std::ldexp(x, j);
    const double sy = std::ldexp(y, j);
    const double first = std::ceil(std::ldexp(hi, j) - reach);
    const double last = std::floor(std::ldexp(lo, j));
    // Once no translate covers both points, none does on finer levels either.
    if (first > last) break;
    double level = 0.0;
    for (double k = first; k <= last; k += 1.0) level += table.psi(sx - k) * table.psi(sy - k);
    total += std::ldexp(std::pow(2.0, -2.0 * j * spec.s), j) * level;
  }
  return total;
}

}  // namespace miskrige
