#include "uq/plastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "uq/errors.hpp"

namespace uq {

PlasticMaterial PlasticMaterial::with_hardening_ratio(Eigen::VectorXd E, double nu, double sigma_y,
                                                      double hardening_ratio) {
  PlasticMaterial m;
  m.H = hardening_ratio * E;
  m.E = std::move(E);
  m.nu = nu;
  m.sigma_y = sigma_y;
  return m;
}

void PlasticMaterial::validate(int element_count) const {
  if (E.size() != element_count || H.size() != element_count) {
    throw ContractError("PlasticMaterial: one E and one H per element expected");
  }
  if (!(E.array() > 0.0).all() || !E.allFinite()) throw DomainError("PlasticMaterial: E must be positive");
  if (!(H.array() >= 0.0).all() || !H.allFinite()) throw DomainError("PlasticMaterial: H must be non-negative");
  if (!(nu >= 0.0 && nu < 0.5)) throw DomainError("PlasticMaterial: nu must lie in [0, 0.5)");
  if (!(sigma_y > 0.0) || !std::isfinite(sigma_y)) throw DomainError("PlasticMaterial: sigma_y must be positive");
}

void LoadSchedule::validate() const {
  if (!(increment > 0.0)) throw ConfigError("load_step must be positive");
  if (!(end > start)) throw ConfigError("load_end must exceed load_start");
  const double n = (end - start) / increment;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) {
    throw ConfigError("load_step must divide load_end - load_start a whole number of times");
  }
}

int LoadSchedule::increments() const {
  validate();
  return static_cast<int>(std::lround((end - start) / increment));
}

namespace {

// P with sigma^T P sigma = (2/3) sigma_eq^2 in Voigt notation with engineering shear.
const Eigen::Matrix3d& projection() {
  static const Eigen::Matrix3d P = (Eigen::Matrix3d() << 2, -1, 0, -1, 2, 0, 0, 0, 6).finished() / 3.0;
  return P;
}

// Common eigenbasis of P and the plane-stress D (columns).
const Eigen::Matrix3d& eigenbasis() {
  static const Eigen::Matrix3d Q = [] {
    const double r = std::sqrt(0.5);
    Eigen::Matrix3d q;
    q << r, r, 0,
         r, -r, 0,
         0, 0, 1;
    return q;
  }();
  return Q;
}

constexpr double kLocalTolerance = 1e-10;
constexpr int kLocalIterations = 50;

}  // namespace

double von_mises_stress(const Eigen::Vector3d& s) {
  return std::sqrt(std::max(0.0, s[0] * s[0] - s[0] * s[1] + s[1] * s[1] + 3.0 * s[2] * s[2]));
}

double yield_function(const Eigen::Vector3d& stress, double kappa, const PointMaterial& mat) {
  return von_mises_stress(stress) - (mat.sigma_y + mat.H * kappa);
}

ReturnMappingResult return_mapping(const Eigen::Vector3d& strain_increment, const GaussPointState& state,
                                   const PointMaterial& mat) {
  const Eigen::Matrix3d D = plane_stress_matrix(mat.E, mat.nu);
  ReturnMappingResult out;
  out.state = state;
  out.state.stress = state.stress + D * strain_increment;
  out.tangent = D;

  const double radius = mat.sigma_y + mat.H * state.kappa;
  const double seq_trial = von_mises_stress(out.state.stress);
  if (seq_trial - radius <= 0.0) return out;

  // In the eigenbasis, sigma_i(dl) = trial_i / (1 + dl d_i p_i).
  const Eigen::Matrix3d& Q = eigenbasis();
  const double G = mat.E / (2.0 * (1.0 + mat.nu));
  const Eigen::Vector3d d(mat.E / (1.0 - mat.nu), 2.0 * G, G);
  const Eigen::Vector3d p(1.0 / 3.0, 1.0, 2.0);
  const Eigen::Vector3d dp = d.cwiseProduct(p);
  const Eigen::Vector3d trial = Q.transpose() * out.state.stress;

  auto sigma_eq = [&](double dl, double* derivative) {
    double sum = 0.0, dsum = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double denom = 1.0 + dl * dp[i];
      const double si = trial[i] / denom;
      sum += p[i] * si * si;
      dsum += -2.0 * p[i] * si * si * dp[i] / denom;
    }
    const double seq = std::sqrt(1.5 * sum);
    if (derivative) *derivative = seq > 0.0 ? 0.75 * dsum / seq : 0.0;
    return seq;
  };
  auto residual = [&](double dl, double* derivative) {
    double dseq = 0.0;
    const double seq = sigma_eq(dl, &dseq);
    const double a = 1.0 - (2.0 / 3.0) * mat.H * dl;
    if (derivative) *derivative = dseq * a - (2.0 / 3.0) * mat.H * seq;
    return seq * a - radius;
  };

  // residual(hi) <= 0 because sigma_eq(dl) <= seq_trial / (1 + dl min(d p)).
  double lo = 0.0;
  double hi = (seq_trial / radius - 1.0) / dp.minCoeff();
  if (mat.H > 0.0) hi = std::min(hi, 1.5 / mat.H);
  double dl = 0.0;
  double g = seq_trial - radius;
  bool converged = false;
  for (int it = 1; it <= kLocalIterations; ++it) {
    double dg = 0.0;
    g = residual(dl, &dg);
    out.iterations = it;
    if (std::abs(g) <= kLocalTolerance * mat.sigma_y) {
      converged = true;
      break;
    }
    if (g > 0.0) lo = dl; else hi = dl;
    double next = dg < 0.0 ? dl - g / dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    dl = next;
  }
  if (!converged) {
    throw SampleFailure("return_mapping: no convergence in " + std::to_string(kLocalIterations) +
                        " iterations (|f| = " + std::to_string(std::abs(g)) + ")");
  }

  const Eigen::Vector3d scale = (Eigen::Vector3d::Ones() + dl * dp).cwiseInverse();
  const Eigen::Vector3d sigma = Q * trial.cwiseProduct(scale);
  const double seq = von_mises_stress(sigma);
  const Eigen::Matrix3d& P = projection();
  const Eigen::Vector3d Ps = P * sigma;

  out.plastic = true;
  out.state.stress = sigma;
  out.state.plastic_strain = state.plastic_strain + dl * Ps;
  out.state.kappa = state.kappa + (2.0 / 3.0) * dl * seq;

  // Xi = (D^-1 + dl P)^-1, then the rank-one consistency correction.
  const Eigen::Matrix3d Xi = Q * d.cwiseProduct(scale).asDiagonal() * Q.transpose();
  const Eigen::Vector3d XiPs = Xi * Ps;
  const double a = 1.0 - (2.0 / 3.0) * mat.H * dl;
  const double b = (2.0 / 3.0) * mat.H * seq;
  const double k = a * 1.5 / seq;
  const double c = k / (k * Ps.dot(XiPs) + b);
  out.tangent = Xi - c * XiPs * XiPs.transpose();
  return out;
}

Eigen::VectorXd internal_forces(const MeshLevel& mesh, const std::vector<GaussPointState>& states) {
  if (states.size() != static_cast<std::size_t>(4 * mesh.element_count())) {
    throw ContractError("internal_forces: 4 Gauss point states per element expected");
  }
  Eigen::VectorXd q = Eigen::VectorXd::Zero(mesh.total_dofs());
  const double t = mesh.geometry.width;
  for (int e = 0; e < mesh.element_count(); ++e) {
    Eigen::Matrix<double, 8, 1> qe = Eigen::Matrix<double, 8, 1>::Zero();
    for (int g = 0; g < 4; ++g) {
      const auto s = shape_functions(mesh, e, kGaussPoints[g][0], kGaussPoints[g][1]);
      qe.noalias() += s.B.transpose() * states[4 * e + g].stress * (s.det_jacobian * t);
    }
    for (int a = 0; a < 4; ++a) q.segment<2>(2 * mesh.elements(e, a)) += qe.segment<2>(2 * a);
  }
  return q;
}

PlasticSolver::PlasticSolver(const MeshLevel& mesh) : mesh_(&mesh), pattern_(mesh) {
  for (int g = 0; g < 4; ++g) {
    const auto s = shape_functions(mesh, 0, kGaussPoints[g][0], kGaussPoints[g][1]);
    B_[g] = s.B;
    weight_ = s.det_jacobian * mesh.geometry.width;
  }
}

PlasticResponse PlasticSolver::solve(const PlasticMaterial& material, const LoadSchedule& schedule,
                                     const Eigen::VectorXd& unit_load_full,
                                     const std::vector<int>& observed_nodes,
                                     const PlasticSolverOptions& options) {
  const MeshLevel& mesh = *mesh_;
  const int ne = mesh.element_count();
  material.validate(ne);
  if (unit_load_full.size() != mesh.total_dofs()) throw ContractError("solve_elastoplastic: load size mismatch");
  for (int node : observed_nodes) {
    if (node < 0 || node >= mesh.node_count()) throw ContractError("solve_elastoplastic: observed node out of range");
  }
  const int n_inc = schedule.increments();

  std::vector<std::array<int, 8>> dofs(ne);
  for (int e = 0; e < ne; ++e) {
    for (int a = 0; a < 4; ++a) {
      dofs[e][2 * a] = mesh.free_index[2 * mesh.elements(e, a)];
      dofs[e][2 * a + 1] = mesh.free_index[2 * mesh.elements(e, a) + 1];
    }
  }
  std::vector<PointMaterial> point(ne);
  for (int e = 0; e < ne; ++e) point[e] = {material.E[e], material.nu, material.sigma_y, material.H[e]};

  const Eigen::VectorXd unit = mesh.restrict_to_free(unit_load_full);
  const double increment_norm = schedule.increment * unit.norm();
  if (!(increment_norm > 0.0)) throw ContractError("solve_elastoplastic: zero load pattern");
  const double tolerance = options.residual_factor * increment_norm;

  const int ngp = 4 * ne;
  std::vector<GaussPointState> committed(ngp), trial(ngp);
  std::vector<Eigen::Matrix3d> tangent(ngp);
  for (int e = 0; e < ne; ++e) {
    const Eigen::Matrix3d D = plane_stress_matrix(material.E[e], material.nu);
    for (int g = 0; g < 4; ++g) tangent[4 * e + g] = D;
  }

  auto element_vector = [&](const Eigen::VectorXd& v, int e) {
    Eigen::Matrix<double, 8, 1> ve;
    for (int k = 0; k < 8; ++k) ve[k] = dofs[e][k] >= 0 ? v[dofs[e][k]] : 0.0;
    return ve;
  };
  auto assemble_forces = [&](const std::vector<GaussPointState>& states) {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(mesh.free_dof_count);
    for (int e = 0; e < ne; ++e) {
      Eigen::Matrix<double, 8, 1> qe = Eigen::Matrix<double, 8, 1>::Zero();
      for (int g = 0; g < 4; ++g) qe.noalias() += B_[g].transpose() * states[4 * e + g].stress;
      for (int k = 0; k < 8; ++k) {
        if (dofs[e][k] >= 0) q[dofs[e][k]] += weight_ * qe[k];
      }
    }
    return q;
  };

  PlasticResponse out;
  out.deflection.resize(n_inc, static_cast<Eigen::Index>(observed_nodes.size()));
  Eigen::VectorXd u_committed = Eigen::VectorXd::Zero(mesh.free_dof_count);
  Eigen::VectorXd q_committed = Eigen::VectorXd::Zero(mesh.free_dof_count);

  for (int inc = 1; inc <= n_inc; ++inc) {
    const Eigen::VectorXd f_ext = schedule.force(inc) * unit;
    Eigen::VectorXd u = u_committed;
    Eigen::VectorXd r = f_ext - q_committed;
    double r_norm = r.norm();
    bool converged = false;
    int it = 0;
    while (it < options.max_newton_iterations) {
      ++it;
      SparseMatrixd K = pattern_.zero();
      for (int e = 0; e < ne; ++e) {
        Matrix8d ke = Matrix8d::Zero();
        for (int g = 0; g < 4; ++g) ke.noalias() += B_[g].transpose() * tangent[4 * e + g] * B_[g];
        pattern_.scatter(K, e, ke, weight_);
      }
      if (!analyzed_) {
        ldlt_.analyzePattern(K);
        analyzed_ = true;
      }
      ldlt_.factorize(K);
      if (ldlt_.info() != Eigen::Success) throw SampleFailure("solve_elastoplastic: tangent factorization failed");
      u += ldlt_.solve(r);
      if (!u.allFinite()) throw SampleFailure("solve_elastoplastic: non-finite displacement");

      const Eigen::VectorXd du = u - u_committed;
      for (int e = 0; e < ne; ++e) {
        const Eigen::Matrix<double, 8, 1> due = element_vector(du, e);
        for (int g = 0; g < 4; ++g) {
          auto rm = return_mapping(B_[g] * due, committed[4 * e + g], point[e]);
          trial[4 * e + g] = rm.state;
          tangent[4 * e + g] = rm.tangent;
        }
      }
      r = f_ext - assemble_forces(trial);
      r_norm = r.norm();
      if (r_norm <= tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw SampleFailure("solve_elastoplastic: increment " + std::to_string(inc) + " did not converge in " +
                          std::to_string(options.max_newton_iterations) + " iterations");
    }

    committed.swap(trial);
    u_committed = u;
    q_committed = f_ext - r;

    double max_f = -std::numeric_limits<double>::infinity();
    for (int gp = 0; gp < ngp; ++gp) {
      max_f = std::max(max_f, yield_function(committed[gp].stress, committed[gp].kappa, point[gp / 4]));
    }
    out.force.push_back(schedule.force(inc));
    out.newton_iterations.push_back(it);
    out.residual_ratio.push_back(r_norm / increment_norm);
    out.max_yield_ratio.push_back(max_f / material.sigma_y);
    for (std::size_t k = 0; k < observed_nodes.size(); ++k) {
      const int d = mesh.free_index[2 * observed_nodes[k] + 1];
      out.deflection(inc - 1, static_cast<Eigen::Index>(k)) = d >= 0 ? -u[d] : 0.0;
    }
  }
  out.final_displacement = mesh.expand_to_full(u_committed);
  out.states = std::move(committed);
  return out;
}

PlasticResponse solve_elastoplastic(const MeshLevel& mesh, const PlasticMaterial& material,
                                   const LoadSchedule& schedule, const Eigen::VectorXd& unit_load_full,
                                   const std::vector<int>& observed_nodes, const PlasticSolverOptions& options) {
  PlasticSolver solver(mesh);
  return solver.solve(material, schedule, unit_load_full, observed_nodes, options);
}

}  // namespace uq
