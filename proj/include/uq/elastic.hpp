#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "uq/mesh.hpp"

namespace uq {

using SparseMatrixd = Eigen::SparseMatrix<double>;
using SparseMatrixcd = Eigen::SparseMatrix<std::complex<double>>;
using Matrix8d = Eigen::Matrix<double, 8, 8>;

/// Plane-stress constitutive matrix for engineering shear strain.
template <class Scalar = double>
Eigen::Matrix<Scalar, 3, 3> plane_stress_matrix(Scalar E, Scalar nu) {
  Eigen::Matrix<Scalar, 3, 3> D;
  const Scalar c = E / (Scalar(1) - nu * nu);
  D << c, c * nu, Scalar(0),
       c * nu, c, Scalar(0),
       Scalar(0), Scalar(0), c * (Scalar(1) - nu) / Scalar(2);
  return D;
}

/// K^e = int B^T D B dOmega by 2x2 Gauss quadrature, times the out-of-plane thickness.
Matrix8d element_stiffness(const Eigen::Matrix<double, 4, 2>& corners, const Eigen::Matrix3d& D,
                           double thickness);
Matrix8d element_stiffness(const MeshLevel& mesh, int element, double E, double nu, double thickness);

/// Consistent mass M^e = int rho N^T N dOmega (interleaved x/y DOFs).
Matrix8d element_mass(const MeshLevel& mesh, int element, double rho, double thickness);

struct ElasticMaterial {
  Eigen::VectorXd E;  // Young's modulus per element (Pa)
  double nu = 0.15;
  double rho = 2500.0;
  double eta = 0.03;  // hysteretic damping ratio

  void validate(int element_count) const;
};

/// Stiffness, mass and load restricted to the free DOFs.
struct AssembledSystem {
  SparseMatrixd K;
  SparseMatrixd M;
  Eigen::VectorXd f;
};

/// Compressed sparsity pattern of a mesh's free-DOF operator, with each element's 8x8 block
/// mapped to offsets into the value array. Matrices of any scalar type built from zero()
/// share these offsets.
class SystemPattern {
 public:
  explicit SystemPattern(const MeshLevel& mesh);

  const SparseMatrixd& zero() const { return pattern_; }
  Eigen::Index size() const { return pattern_.rows(); }

  /// Adds `scale * ke` to the free-DOF entries of element e in A.
  template <class Scalar, class Block>
  void scatter(Eigen::SparseMatrix<Scalar>& A, int e, const Block& ke, Scalar scale = Scalar(1)) const {
    Scalar* values = A.valuePtr();
    const auto& off = offsets_[e];
    for (int k = 0; k < 64; ++k) {
      if (off[k] >= 0) values[off[k]] += scale * ke(k % 8, k / 8);
    }
  }

 private:
  SparseMatrixd pattern_;
  std::vector<std::array<int, 64>> offsets_;
};

/// Per-mesh assembly of the elastic operators. All elements of a level are identical
/// squares, so the element matrices for unit modulus and density are computed once.
class ElasticOperator {
 public:
  ElasticOperator(const MeshLevel& mesh, double nu);

  const MeshLevel& mesh() const { return *mesh_; }
  const SystemPattern& pattern() const { return pattern_; }
  double nu() const { return nu_; }

  SparseMatrixd stiffness(const Eigen::VectorXd& E) const;
  SparseMatrixd mass(double rho) const;
  AssembledSystem assemble(const ElasticMaterial& material, const Eigen::VectorXd& load_full) const;

 private:
  const MeshLevel* mesh_;
  double nu_;
  SystemPattern pattern_;
  Matrix8d unit_stiffness_;
  Matrix8d unit_mass_;
};

/// Assembles K (Dirichlet rows/columns removed), consistent M and the free part of the load.
AssembledSystem assemble(const MeshLevel& mesh, const ElasticMaterial& material,
                         const Eigen::VectorXd& load_full);

/// Sparse Cholesky whose symbolic analysis is reused while the pattern stays the same.
class StaticSolver {
 public:
  Eigen::VectorXd solve(const SparseMatrixd& K, const Eigen::VectorXd& f);

 private:
  Eigen::SimplicialLLT<SparseMatrixd> llt_;
  bool analyzed_ = false;
};

/// Sparse LU for (K (1 + i eta) - (2 pi f)^2 M) u = f, symbolic analysis reused.
class DynamicSolver {
 public:
  Eigen::VectorXcd solve(const SparseMatrixd& K, const SparseMatrixd& M, const Eigen::VectorXd& f,
                         double eta, double f_hz);

 private:
  Eigen::SparseLU<SparseMatrixcd> lu_;
  SparseMatrixcd A_;
  bool analyzed_ = false;
};

/// Displacements on the free DOFs. Throws NumericError if K is not positive definite.
Eigen::VectorXd solve_static(const AssembledSystem& sys);

/// Complex displacements on the free DOFs.
Eigen::VectorXcd solve_dynamic(const AssembledSystem& sys, double eta, double f_hz);

/// Undamped natural frequencies (Hz) from K v = omega^2 M v, lowest first. Dense; coarse meshes only.
Eigen::VectorXd natural_frequencies(const AssembledSystem& sys, int count);

/// sum_e K^e u^e over all DOFs, including the constrained ones (reactions live there).
Eigen::VectorXd elastic_internal_forces(const MeshLevel& mesh, const Eigen::VectorXd& E, double nu,
                                        const Eigen::VectorXd& u_full);

/// Shortest bending wavelength at f_max: sqrt(2 pi / f_max) (E I / (rho A))^(1/4).
double min_wavelength(double E, double I, double rho, double A, double f_max);

}  // namespace uq
