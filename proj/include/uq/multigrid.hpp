#pragma once

#include <vector>

#include <Eigen/Core>

#include "uq/elastic.hpp"
#include "uq/mesh.hpp"

namespace uq {

/// Bilinear interpolation from the free DOFs of `coarse` to the free DOFs of `fine`, the next
/// level of the same nested hierarchy.
SparseMatrixd prolongation(const MeshLevel& coarse, const MeshLevel& fine);

/// Element moduli of the next coarser level: the mean over the four children.
Eigen::VectorXd coarsen_modulus(const MeshLevel& fine, const Eigen::VectorXd& E);

struct MultigridOptions {
  double relative_tolerance = 1e-11;  // on the residual 2-norm
  int max_iterations = 200;
  int smoothing_steps = 2;
};

/// Conjugate gradients preconditioned by a symmetric geometric multigrid V-cycle (Gauss-Seidel
/// smoothing, rediscretized coarse operators, sparse Cholesky on level 0). Cost is linear in
/// the number of unknowns.
class MultigridSolver {
 public:
  /// ops[k] is the operator of level k; all must outlive the solver.
  explicit MultigridSolver(std::vector<const ElasticOperator*> ops, MultigridOptions options = {});

  /// Free-DOF displacements on `level` for element moduli E of that level.
  /// Throws NumericError when CG does not reach the tolerance.
  Eigen::VectorXd solve(int level, const Eigen::VectorXd& E, const Eigen::VectorXd& f);

  int last_iterations() const { return iterations_; }
  double last_relative_residual() const { return residual_; }

 private:
  void vcycle(int k, const Eigen::VectorXd& b, Eigen::VectorXd& x);
  void smooth(int k, const Eigen::VectorXd& b, Eigen::VectorXd& x, bool forward) const;

  std::vector<const ElasticOperator*> ops_;
  MultigridOptions options_;
  std::vector<SparseMatrixd> P_;  // P_[k]: level k - 1 -> level k
  std::vector<SparseMatrixd> K_;
  std::vector<Eigen::VectorXd> inv_diag_;
  StaticSolver coarse_;
  int iterations_ = 0;
  double residual_ = 0.0;
};

}  // namespace uq
