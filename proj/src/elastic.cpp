#include "uq/elastic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "uq/errors.hpp"

namespace uq {

Matrix8d element_stiffness(const Eigen::Matrix<double, 4, 2>& corners, const Eigen::Matrix3d& D,
                           double thickness) {
  Matrix8d ke = Matrix8d::Zero();
  for (const auto& gp : kGaussPoints) {
    const auto s = shape_functions<double>(corners, gp[0], gp[1]);
    if (!(s.det_jacobian > 0.0)) throw ContractError("element_stiffness: degenerate element");
    ke.noalias() += s.B.transpose() * D * s.B * (s.det_jacobian * thickness);
  }
  return ke;
}

Matrix8d element_stiffness(const MeshLevel& mesh, int element, double E, double nu, double thickness) {
  if (!(E > 0.0)) throw DomainError("element_stiffness: E must be positive");
  return element_stiffness(element_corners(mesh, element), plane_stress_matrix(E, nu), thickness);
}

Matrix8d element_mass(const MeshLevel& mesh, int element, double rho, double thickness) {
  const auto corners = element_corners(mesh, element);
  Matrix8d me = Matrix8d::Zero();
  for (const auto& gp : kGaussPoints) {
    const auto s = shape_functions<double>(corners, gp[0], gp[1]);
    const Eigen::Matrix4d nn = s.N * s.N.transpose() * (rho * s.det_jacobian * thickness);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        me(2 * a, 2 * b) += nn(a, b);
        me(2 * a + 1, 2 * b + 1) += nn(a, b);
      }
    }
  }
  return me;
}

void ElasticMaterial::validate(int element_count) const {
  if (E.size() != element_count) {
    throw ContractError("ElasticMaterial: " + std::to_string(E.size()) + " moduli for " +
                        std::to_string(element_count) + " elements");
  }
  if (!(E.array() > 0.0).all() || !E.allFinite()) throw DomainError("ElasticMaterial: E must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) throw DomainError("ElasticMaterial: nu must lie in [0, 0.5)");
  if (!(rho > 0.0)) throw DomainError("ElasticMaterial: rho must be positive");
  if (!(eta >= 0.0)) throw DomainError("ElasticMaterial: eta must be non-negative");
}

SystemPattern::SystemPattern(const MeshLevel& mesh) {
  const int n = mesh.free_dof_count;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.element_count()) * 64);

  auto element_dofs = [&mesh](int e) {
    std::array<int, 8> dofs;
    for (int a = 0; a < 4; ++a) {
      const int node = mesh.elements(e, a);
      dofs[2 * a] = mesh.free_index[2 * node];
      dofs[2 * a + 1] = mesh.free_index[2 * node + 1];
    }
    return dofs;
  };

  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto dofs = element_dofs(e);
    for (int r : dofs) {
      for (int c : dofs) {
        if (r >= 0 && c >= 0) triplets.emplace_back(r, c, 1.0);
      }
    }
  }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(triplets.begin(), triplets.end());
  pattern_.makeCompressed();
  pattern_.coeffs().setZero();

  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  offsets_.resize(mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto dofs = element_dofs(e);
    for (int k = 0; k < 64; ++k) {
      const int r = dofs[k % 8];
      const int c = dofs[k / 8];
      if (r < 0 || c < 0) {
        offsets_[e][k] = -1;
        continue;
      }
      const int* pos = std::lower_bound(inner + outer[c], inner + outer[c + 1], r);
      offsets_[e][k] = static_cast<int>(pos - inner);
    }
  }
}

ElasticOperator::ElasticOperator(const MeshLevel& mesh, double nu)
    : mesh_(&mesh), nu_(nu), pattern_(mesh) {
  if (!(nu >= 0.0 && nu < 0.5)) throw DomainError("ElasticOperator: nu must lie in [0, 0.5)");
  const double t = mesh.geometry.width;
  unit_stiffness_ = element_stiffness(mesh, 0, 1.0, nu, t);
  unit_mass_ = element_mass(mesh, 0, 1.0, t);
}

SparseMatrixd ElasticOperator::stiffness(const Eigen::VectorXd& E) const {
  if (E.size() != mesh_->element_count()) throw ContractError("stiffness: one modulus per element expected");
  SparseMatrixd K = pattern_.zero();
  for (int e = 0; e < mesh_->element_count(); ++e) pattern_.scatter(K, e, unit_stiffness_, E[e]);
  return K;
}

SparseMatrixd ElasticOperator::mass(double rho) const {
  SparseMatrixd M = pattern_.zero();
  for (int e = 0; e < mesh_->element_count(); ++e) pattern_.scatter(M, e, unit_mass_, rho);
  return M;
}

AssembledSystem ElasticOperator::assemble(const ElasticMaterial& material,
                                          const Eigen::VectorXd& load_full) const {
  material.validate(mesh_->element_count());
  if (std::abs(material.nu - nu_) > 0.0) throw ContractError("assemble: Poisson ratio differs from operator");
  return {stiffness(material.E), mass(material.rho), mesh_->restrict_to_free(load_full)};
}

AssembledSystem assemble(const MeshLevel& mesh, const ElasticMaterial& material,
                         const Eigen::VectorXd& load_full) {
  material.validate(mesh.element_count());
  return ElasticOperator(mesh, material.nu).assemble(material, load_full);
}

Eigen::VectorXd StaticSolver::solve(const SparseMatrixd& K, const Eigen::VectorXd& f) {
  if (!analyzed_) {
    llt_.analyzePattern(K);
    analyzed_ = true;
  }
  llt_.factorize(K);
  if (llt_.info() != Eigen::Success) {
    throw NumericError("sparse Cholesky failed: stiffness matrix is not positive definite");
  }
  return llt_.solve(f);
}

Eigen::VectorXcd DynamicSolver::solve(const SparseMatrixd& K, const SparseMatrixd& M,
                                      const Eigen::VectorXd& f, double eta, double f_hz) {
  if (!(eta >= 0.0) || !(f_hz >= 0.0)) throw DomainError("solve_dynamic: eta and frequency must be non-negative");
  if (K.nonZeros() != M.nonZeros()) throw ContractError("solve_dynamic: K and M must share a pattern");
  const double omega2 = std::pow(2.0 * std::numbers::pi * f_hz, 2);
  const std::complex<double> kfac(1.0, eta);

  if (!analyzed_ || A_.rows() != K.rows() || A_.nonZeros() != K.nonZeros()) {
    A_ = K.cast<std::complex<double>>();
    lu_.analyzePattern(A_);
    analyzed_ = true;
  }
  for (Eigen::Index k = 0; k < K.nonZeros(); ++k) {
    A_.valuePtr()[k] = kfac * K.valuePtr()[k] - omega2 * M.valuePtr()[k];
  }
  lu_.factorize(A_);
  if (lu_.info() != Eigen::Success) {
    throw NumericError("solve_dynamic: singular system at " + std::to_string(f_hz) + " Hz");
  }
  const Eigen::VectorXcd rhs = f.cast<std::complex<double>>();
  Eigen::VectorXcd u = lu_.solve(rhs);
  const double f_norm = f.norm();
  if (!u.allFinite()) throw NumericError("solve_dynamic: non-finite response");
  if (f_norm > 0.0) {
    const double residual = (A_ * u - rhs).norm() / f_norm;
    // ||A|| ||u|| / ||f|| bounds the condition number from below.
    const double amplification = A_.coeffs().cwiseAbs().maxCoeff() * u.norm() / f_norm;
    if (!(residual < 1e-6) || amplification > 1e12) {
      throw NumericError("solve_dynamic: near-singular system at " + std::to_string(f_hz) + " Hz");
    }
  }
  return u;
}

Eigen::VectorXd solve_static(const AssembledSystem& sys) {
  StaticSolver solver;
  return solver.solve(sys.K, sys.f);
}

Eigen::VectorXcd solve_dynamic(const AssembledSystem& sys, double eta, double f_hz) {
  DynamicSolver solver;
  return solver.solve(sys.K, sys.M, sys.f, eta, f_hz);
}

Eigen::VectorXd natural_frequencies(const AssembledSystem& sys, int count) {
  const Eigen::MatrixXd K(sys.K);
  const Eigen::MatrixXd M(sys.M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("natural_frequencies: eigensolver failed");
  const int n = std::min<int>(count, static_cast<int>(es.eigenvalues().size()));
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f[i] = std::sqrt(std::max(es.eigenvalues()[i], 0.0)) / (2.0 * std::numbers::pi);
  return f;
}

Eigen::VectorXd elastic_internal_forces(const MeshLevel& mesh, const Eigen::VectorXd& E, double nu,
                                        const Eigen::VectorXd& u_full) {
  if (u_full.size() != mesh.total_dofs()) throw ContractError("elastic_internal_forces: size mismatch");
  if (E.size() != mesh.element_count()) throw ContractError("elastic_internal_forces: one modulus per element");
  Eigen::VectorXd q = Eigen::VectorXd::Zero(mesh.total_dofs());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Matrix8d ke = element_stiffness(mesh, e, E[e], nu, mesh.geometry.width);
    Eigen::Matrix<double, 8, 1> ue;
    for (int a = 0; a < 4; ++a) ue.segment<2>(2 * a) = u_full.segment<2>(2 * mesh.elements(e, a));
    const Eigen::Matrix<double, 8, 1> qe = ke * ue;
    for (int a = 0; a < 4; ++a) q.segment<2>(2 * mesh.elements(e, a)) += qe.segment<2>(2 * a);
  }
  return q;
}

double min_wavelength(double E, double I, double rho, double A, double f_max) {
  if (!(E > 0.0 && I > 0.0 && rho > 0.0 && A > 0.0 && f_max > 0.0)) {
    throw DomainError("min_wavelength: all inputs must be positive");
  }
  return std::sqrt(2.0 * std::numbers::pi / f_max) * std::pow(E * I / (rho * A), 0.25);
}

}  // namespace uq
