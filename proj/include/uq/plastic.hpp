#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include "uq/elastic.hpp"
#include "uq/mesh.hpp"

namespace uq {

/// Plane-stress von Mises material with linear isotropic hardening, per element.
struct PlasticMaterial {
  Eigen::VectorXd E;  // Pa
  Eigen::VectorXd H;  // hardening modulus, Pa
  double nu = 0.25;
  double sigma_y = 240e6;

  /// H_e = hardening_ratio * E_e.
  static PlasticMaterial with_hardening_ratio(Eigen::VectorXd E, double nu, double sigma_y,
                                              double hardening_ratio);
  void validate(int element_count) const;
};

/// Material constants seen by a single integration point.
struct PointMaterial {
  double E = 0.0;
  double nu = 0.0;
  double sigma_y = 0.0;
  double H = 0.0;
};

/// Stress and plastic strain in Voigt order (xx, yy, xy) with engineering shear strain.
struct GaussPointState {
  Eigen::Vector3d stress = Eigen::Vector3d::Zero();
  Eigen::Vector3d plastic_strain = Eigen::Vector3d::Zero();
  double kappa = 0.0;  // accumulated equivalent plastic strain
};

struct LoadSchedule {
  double start = 0.0;
  double end = 13.5e3;
  double increment = 135.0;

  void validate() const;
  int increments() const;
  double force(int k) const { return start + k * increment; }  // k = 1..increments()
};

double von_mises_stress(const Eigen::Vector3d& stress);

/// sigma_eq - (sigma_y + H kappa).
double yield_function(const Eigen::Vector3d& stress, double kappa, const PointMaterial& mat);

struct ReturnMappingResult {
  GaussPointState state;
  Eigen::Matrix3d tangent;  // consistent (algorithmic) tangent
  bool plastic = false;
  int iterations = 0;
};

/// Backward-Euler stress update from a converged state for a total strain increment.
/// Elastic predictor; if the trial stress violates the yield condition, the plane-stress
/// projected return is solved for the plastic multiplier by safeguarded Newton iteration to
/// |f| <= 1e-10 sigma_y. Throws SampleFailure after 50 iterations.
ReturnMappingResult return_mapping(const Eigen::Vector3d& strain_increment, const GaussPointState& state,
                                   const PointMaterial& mat);

/// q = int B^T sigma dOmega over all DOFs; `states` holds 4 Gauss points per element.
Eigen::VectorXd internal_forces(const MeshLevel& mesh, const std::vector<GaussPointState>& states);

struct PlasticSolverOptions {
  int max_newton_iterations = 30;
  /// Converged when ||f_ext - q|| <= residual_factor * ||load increment||.
  double residual_factor = 1e-4;
};

struct PlasticResponse {
  std::vector<double> force;             // total load after each increment
  Eigen::MatrixXd deflection;            // increments x observed nodes, downward positive
  Eigen::VectorXd final_displacement;    // all DOFs after the last increment
  std::vector<GaussPointState> states;   // after the last increment
  std::vector<int> newton_iterations;    // per increment
  std::vector<double> residual_ratio;    // ||r|| / ||load increment|| at convergence
  std::vector<double> max_yield_ratio;   // max_gp f / sigma_y at convergence
};

/// Per-mesh state reused across samples: sparsity pattern, Gauss-point B matrices and the
/// symbolic factorization of the tangent stiffness.
class PlasticSolver {
 public:
  explicit PlasticSolver(const MeshLevel& mesh);

  const MeshLevel& mesh() const { return *mesh_; }

  PlasticResponse solve(const PlasticMaterial& material, const LoadSchedule& schedule,
                        const Eigen::VectorXd& unit_load_full, const std::vector<int>& observed_nodes,
                        const PlasticSolverOptions& options = {});

 private:
  const MeshLevel* mesh_;
  SystemPattern pattern_;
  std::array<Eigen::Matrix<double, 3, 8>, 4> B_;
  double weight_;  // det J * thickness, the same at every Gauss point
  Eigen::SimplicialLDLT<SparseMatrixd> ldlt_;
  bool analyzed_ = false;
};

/// Incremental-iterative full Newton-Raphson solve. `unit_load_full` is the load pattern for a
/// total force of 1 N; increment k applies schedule.force(k) times that pattern.
/// Throws SampleFailure when an increment does not converge.
PlasticResponse solve_elastoplastic(const MeshLevel& mesh, const PlasticMaterial& material,
                                   const LoadSchedule& schedule, const Eigen::VectorXd& unit_load_full,
                                   const std::vector<int>& observed_nodes,
                                   const PlasticSolverOptions& options = {});

}  // namespace uq
