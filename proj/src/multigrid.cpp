#include "uq/multigrid.hpp"

#include <cmath>
#include <string>

#include "uq/errors.hpp"

namespace uq {

SparseMatrixd prolongation(const MeshLevel& coarse, const MeshLevel& fine) {
  if (fine.nx != 2 * coarse.nx || fine.ny != 2 * coarse.ny) throw ContractError("prolongation: meshes not nested");
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(fine.total_dofs()) * 4);
  for (int j = 0; j <= fine.ny; ++j) {
    for (int i = 0; i <= fine.nx; ++i) {
      const int is[2] = {i / 2, (i + 1) / 2};
      const int js[2] = {j / 2, (j + 1) / 2};
      const int ni = i % 2 ? 2 : 1;
      const int nj = j % 2 ? 2 : 1;
      const double w = 1.0 / (ni * nj);
      for (int c = 0; c < 2; ++c) {
        const int row = fine.free_index[2 * fine.node_id(i, j) + c];
        if (row < 0) continue;
        for (int a = 0; a < ni; ++a) {
          for (int b = 0; b < nj; ++b) {
            const int col = coarse.free_index[2 * coarse.node_id(is[a], js[b]) + c];
            if (col >= 0) t.emplace_back(row, col, w);
          }
        }
      }
    }
  }
  SparseMatrixd P(fine.free_dof_count, coarse.free_dof_count);
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

Eigen::VectorXd coarsen_modulus(const MeshLevel& fine, const Eigen::VectorXd& E) {
  if (E.size() != fine.element_count()) throw ContractError("coarsen_modulus: size mismatch");
  const int nx = fine.nx / 2, ny = fine.ny / 2;
  Eigen::VectorXd out(nx * ny);
  for (int ey = 0; ey < ny; ++ey) {
    for (int ex = 0; ex < nx; ++ex) {
      const int a = 2 * ey * fine.nx + 2 * ex;
      out[ey * nx + ex] = 0.25 * (E[a] + E[a + 1] + E[a + fine.nx] + E[a + fine.nx + 1]);
    }
  }
  return out;
}

MultigridSolver::MultigridSolver(std::vector<const ElasticOperator*> ops, MultigridOptions options)
    : ops_(std::move(ops)), options_(options) {
  if (ops_.empty()) throw ContractError("MultigridSolver: empty hierarchy");
  P_.resize(ops_.size());
  for (std::size_t k = 1; k < ops_.size(); ++k) P_[k] = prolongation(ops_[k - 1]->mesh(), ops_[k]->mesh());
  K_.resize(ops_.size());
  inv_diag_.resize(ops_.size());
}

void MultigridSolver::smooth(int k, const Eigen::VectorXd& b, Eigen::VectorXd& x, bool forward) const {
  // K is symmetric, so column i doubles as row i.
  const SparseMatrixd& K = K_[k];
  const Eigen::Index n = K.cols();
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::Index i = forward ? s : n - 1 - s;
    double r = b[i];
    for (SparseMatrixd::InnerIterator it(K, i); it; ++it) r -= it.value() * x[it.index()];
    x[i] += r * inv_diag_[k][i];
  }
}

void MultigridSolver::vcycle(int k, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
  if (k == 0) {
    x = coarse_.solve(K_[0], b);
    return;
  }
  x.setZero(b.size());
  for (int s = 0; s < options_.smoothing_steps; ++s) smooth(k, b, x, true);
  const Eigen::VectorXd r = b - K_[k] * x;
  Eigen::VectorXd xc;
  vcycle(k - 1, P_[k].transpose() * r, xc);
  x += P_[k] * xc;
  for (int s = 0; s < options_.smoothing_steps; ++s) smooth(k, b, x, false);
}

Eigen::VectorXd MultigridSolver::solve(int level, const Eigen::VectorXd& E, const Eigen::VectorXd& f) {
  if (level < 0 || level >= static_cast<int>(ops_.size())) throw ContractError("MultigridSolver: level out of range");
  if (f.size() != ops_[level]->mesh().free_dof_count) throw ContractError("MultigridSolver: load size mismatch");

  Eigen::VectorXd Ek = E;
  for (int k = level; k >= 0; --k) {
    K_[k] = ops_[k]->stiffness(Ek);
    inv_diag_[k] = K_[k].diagonal().cwiseInverse();
    if (k > 0) Ek = coarsen_modulus(ops_[k]->mesh(), Ek);
  }
  if (level == 0) {
    iterations_ = 0;
    residual_ = 0.0;
    return coarse_.solve(K_[0], f);
  }

  const SparseMatrixd& K = K_[level];
  const double fnorm = f.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(f.size());
  if (fnorm == 0.0) {
    iterations_ = 0;
    residual_ = 0.0;
    return x;
  }
  Eigen::VectorXd r = f, z, p, q;
  vcycle(level, r, z);
  p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= options_.max_iterations; ++it) {
    q.noalias() = K * p;
    const double pq = p.dot(q);
    if (!(pq > 0.0)) throw NumericError("multigrid CG: stiffness matrix is not positive definite");
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    residual_ = r.norm() / fnorm;
    iterations_ = it;
    if (residual_ <= options_.relative_tolerance) return x;
    vcycle(level, r, z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw NumericError("multigrid CG did not converge in " + std::to_string(options_.max_iterations) +
                     " iterations (relative residual " + std::to_string(residual_) + ")");
}

}  // namespace uq
