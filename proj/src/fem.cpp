#include "miskrige/fem.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "miskrige/error.hpp"

namespace miskrige {

namespace {

// Lagrange basis on [0,1] with equispaced nodes a/p: value and derivative of basis a at t.
double lagrange(int degree, int a, double t) {
  double value = 1.0;
  const double ta = static_cast<double>(a) / degree;
  for (int b = 0; b <= degree; ++b) {
    if (b == a) continue;
    const double tb = static_cast<double>(b) / degree;
    value *= (t - tb) / (ta - tb);
  }
  return value;
}

double lagrange_derivative(int degree, int a, double t) {
  const double ta = static_cast<double>(a) / degree;
  double total = 0.0;
  for (int c = 0; c <= degree; ++c) {
    if (c == a) continue;
    double term = 1.0 / (ta - static_cast<double>(c) / degree);
    for (int b = 0; b <= degree; ++b) {
      if (b == a || b == c) continue;
      const double tb = static_cast<double>(b) / degree;
      term *= (t - tb) / (ta - tb);
    }
    total += term;
  }
  return total;
}

void check_arguments(int mesh, int degree) {
  if (mesh < 1) throw ValidationError("FEM mesh count N must be >= 1, got " + std::to_string(mesh));
  if (degree != 1 && degree != 2) {
    throw ValidationError("FEM degree p must be 1 or 2, got " + std::to_string(degree));
  }
}

void check_unit(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ValidationError("FEM kernel argument " + std::to_string(x) + " lies outside [0,1]");
  }
}

}  // namespace

ElementMatrices fem_element_matrices(int mesh, int degree) {
  check_arguments(mesh, degree);
  // Three-point Gauss-Legendre on [0,1]; exact through degree 5.
  const double offset = std::sqrt(0.6) / 2.0;
  const std::array<double, 3> points = {0.5 - offset, 0.5, 0.5 + offset};
  const std::array<double, 3> weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const double width = 1.0 / mesh;

  const int local = degree + 1;
  ElementMatrices out{Eigen::MatrixXd::Zero(local, local), Eigen::MatrixXd::Zero(local, local)};
  for (int g = 0; g < 3; ++g) {
    for (int a = 0; a < local; ++a) {
      for (int b = 0; b < local; ++b) {
        out.mass(a, b) +=
            weights[g] * lagrange(degree, a, points[g]) * lagrange(degree, b, points[g]);
        out.stiffness(a, b) += weights[g] * lagrange_derivative(degree, a, points[g]) *
                               lagrange_derivative(degree, b, points[g]);
      }
    }
  }
  out.mass *= width;
  out.stiffness /= width;
  for (int a = 0; a < local; ++a) {
    for (int b = a + 1; b < local; ++b) {
      out.mass(b, a) = out.mass(a, b);
      out.stiffness(b, a) = out.stiffness(a, b);
    }
  }
  return out;
}

FemAssembly::FemAssembly(int mesh, int degree) : mesh_(mesh), degree_(degree) {
  check_arguments(mesh, degree);
  const int count = node_count();
  nodes_.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) nodes_[i] = static_cast<double>(i) / (mesh * degree);

  const ElementMatrices element = fem_element_matrices(mesh, degree);
  std::vector<Eigen::Triplet<double>> mass_entries;
  std::vector<Eigen::Triplet<double>> stiffness_entries;
  for (int e = 0; e < mesh; ++e) {
    for (int a = 0; a <= degree; ++a) {
      for (int b = 0; b <= degree; ++b) {
        const int row = e * degree + a;
        const int col = e * degree + b;
        mass_entries.emplace_back(row, col, element.mass(a, b));
        stiffness_entries.emplace_back(row, col, element.stiffness(a, b));
      }
    }
  }
  mass_.resize(count, count);
  mass_.setFromTriplets(mass_entries.begin(), mass_entries.end());
  stiffness_.resize(count, count);
  stiffness_.setFromTriplets(stiffness_entries.begin(), stiffness_entries.end());
  precision_ = mass_ + stiffness_;

  auto factor = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(precision_);
  if (factor->info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization of M + A failed (assembly defect)");
  }
  factor_ = std::move(factor);
}

int FemAssembly::precision_bandwidth() const {
  int half = 0;
  for (int col = 0; col < precision_.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(precision_, col); it; ++it) {
      if (it.value() != 0.0) half = std::max(half, std::abs(static_cast<int>(it.row()) - col));
    }
  }
  return 2 * half + 1;
}

BasisValues FemAssembly::basis(double x) const {
  check_unit(x);
  const double scaled = x * mesh_;
  const int element = std::min(static_cast<int>(std::floor(scaled)), mesh_ - 1);
  const double t = scaled - element;
  BasisValues values;
  values.reserve(static_cast<std::size_t>(degree_ + 1));
  for (int a = 0; a <= degree_; ++a) {
    values.emplace_back(element * degree_ + a, lagrange(degree_, a, t));
  }
  return values;
}

Eigen::VectorXd FemAssembly::solve(const Eigen::VectorXd& rhs) const {
  return factor_->solve(rhs);
}

FemAssembly fem_assemble(int mesh, int degree) { return FemAssembly(mesh, degree); }

std::vector<FemEigenpair> fem_eigendecompose(const FemAssembly& assembly, int count) {
  const int size = assembly.node_count();
  if (count < 0 || count > size) {
    throw ValidationError("requested " + std::to_string(count) + " eigenpairs but dim V_N = " +
                          std::to_string(size));
  }
  const Eigen::MatrixXd stiffness(assembly.stiffness());
  const Eigen::MatrixXd mass(assembly.mass());
  // Eigen normalises the eigenvectors so that V^T M V = I.
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(stiffness, mass);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("generalized eigensolve of (A, M) failed");
  }
  std::vector<FemEigenpair> pairs;
  pairs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    pairs.push_back({solver.eigenvalues()(i), solver.eigenvectors().col(i)});
  }
  return pairs;
}

double fem_kernel_eval(const FemAssembly& assembly, double x, double y) {
  const BasisValues bx = assembly.basis(x);
  const BasisValues by = assembly.basis(y);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(assembly.node_count());
  for (const auto& [index, value] : by) rhs(index) += value;
  const Eigen::VectorXd solved = assembly.solve(rhs);
  double total = 0.0;
  for (const auto& [index, value] : bx) total += value * solved(index);
  return total;
}

}  // namespace miskrige
