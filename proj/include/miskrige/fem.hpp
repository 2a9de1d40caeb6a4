#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <memory>
#include <utility>
#include <vector>

namespace miskrige {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Nonzero nodal basis values at a point: (global node index, value).
using BasisValues = std::vector<std::pair<int, double>>;

/// Degree-p Lagrange finite elements on the uniform mesh xi_i = i/N of [0,1],
/// with exact mass M, stiffness A and a Cholesky factorization of Q = M + A.
class FemAssembly {
 public:
  FemAssembly(int mesh, int degree);

  int mesh() const { return mesh_; }
  int degree() const { return degree_; }
  /// dim V_N = pN + 1.
  int node_count() const { return mesh_ * degree_ + 1; }
  /// Node coordinates (element vertices plus interior Lagrange nodes).
  const std::vector<double>& nodes() const { return nodes_; }

  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const SparseMatrix& precision() const { return precision_; }

  /// Full width 2b+1 of the band of Q (b = max |i-j| over nonzeros).
  int precision_bandwidth() const;

  /// Nodal basis evaluated at x in [0,1].
  BasisValues basis(double x) const;
  /// Q^{-1} b for a dense right-hand side.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  int mesh_;
  int degree_;
  std::vector<double> nodes_;
  SparseMatrix mass_;
  SparseMatrix stiffness_;
  SparseMatrix precision_;
  std::shared_ptr<const Eigen::SimplicialLLT<SparseMatrix>> factor_;
};

/// Builds the assembly; throws ValidationError for N < 1 or p not in {1,2}.
FemAssembly fem_assemble(int mesh, int degree);

/// Per-element mass and stiffness on an element of length 1/N.
struct ElementMatrices {
  Eigen::MatrixXd mass;
  Eigen::MatrixXd stiffness;
};
ElementMatrices fem_element_matrices(int mesh, int degree);

/// One generalized eigenpair A v = lambda M v with v^T M v = 1.
struct FemEigenpair {
  double value;
  Eigen::VectorXd vector;
};

/// The `count` smallest generalized eigenpairs in ascending order (dense solve).
std::vector<FemEigenpair> fem_eigendecompose(const FemAssembly& assembly, int count);

/// B(x)^T Q^{-1} B(y).
double fem_kernel_eval(const FemAssembly& assembly, double x, double y);

}  // namespace miskrige
