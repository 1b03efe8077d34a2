#include "uq/beam_problem.hpp"

#include <cmath>

#include "uq/errors.hpp"
#include "uq/multigrid.hpp"

namespace uq {

std::string to_string(Response r) {
  switch (r) {
    case Response::StaticElastic: return "static-elastic";
    case Response::StaticPlastic: return "static-plastic";
    case Response::Dynamic: return "dynamic";
  }
  return "?";
}

std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::Homogeneous: return "homogeneous";
    case ModelKind::Heterogeneous: return "heterogeneous";
    case ModelKind::Fixed: return "fixed";
  }
  return "?";
}

Response parse_response(const std::string& s) {
  if (s == "static-elastic") return Response::StaticElastic;
  if (s == "static-plastic") return Response::StaticPlastic;
  if (s == "dynamic") return Response::Dynamic;
  throw ConfigError("unknown response '" + s + "' (static-elastic, static-plastic, dynamic)");
}

ModelKind parse_model(const std::string& s) {
  if (s == "homogeneous") return ModelKind::Homogeneous;
  if (s == "heterogeneous") return ModelKind::Heterogeneous;
  if (s == "fixed") return ModelKind::Fixed;
  throw ConfigError("unknown model '" + s + "' (homogeneous, heterogeneous, fixed)");
}

BeamProblemSpec BeamProblemSpec::defaults(Response response, ModelKind model) {
  BeamProblemSpec s;
  s.response = response;
  s.model = model;
  switch (response) {
    case Response::StaticElastic:
      s.geometry.clamping = Clamping::BothEnds;
      break;
    case Response::StaticPlastic:
      s.geometry.clamping = Clamping::BothEnds;
      s.geometry.width = 1e-3;
      s.gamma = steel_preset();
      s.fixed_E = 200e9;
      s.nu = 0.25;
      s.rho = 7850.0;
      s.max_level = 3;
      break;
    case Response::Dynamic:
      s.geometry.clamping = Clamping::LeftOnly;
      break;
  }
  return s;
}

void BeamProblemSpec::validate() const {
  geometry.validate();
  gamma.validate();
  if (model == ModelKind::Fixed && !(fixed_E > 0.0)) throw ConfigError("fixed_E must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) throw ConfigError("nu must lie in [0, 0.5)");
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  if (!(eta >= 0.0)) throw ConfigError("eta must be non-negative");
  if (!std::isfinite(load)) throw ConfigError("load must be finite");
  if (max_level < 1 || max_level > 8) throw ConfigError("max_level must lie in [1, 8]");
  if (response == Response::StaticPlastic) {
    schedule.validate();
    if (!(sigma_y > 0.0)) throw ConfigError("sigma_y must be positive");
    if (!(hardening_ratio >= 0.0)) throw ConfigError("hardening_ratio must be non-negative");
  }
  if (response == Response::Dynamic && geometry.clamping != Clamping::LeftOnly) {
    throw ConfigError("the dynamic response uses the cantilever (left-only clamping)");
  }
  if (response != Response::Dynamic && geometry.clamping != Clamping::BothEnds) {
    throw ConfigError("static responses use the beam clamped at both ends");
  }
  if (model == ModelKind::Heterogeneous) {
    covariance.validate();
    if (!(kl_fraction > 0.0 && kl_fraction < 1.0)) throw ConfigError("kl_fraction must lie in (0, 1)");
  }
}

BeamModel::BeamModel(const BeamProblemSpec& spec) : spec_(spec) {
  spec_.validate();
  for (int l = 0; l <= spec_.max_level; ++l) {
    meshes_.push_back(build_mesh(spec_.geometry, l));
  }
  for (int l = 0; l <= spec_.max_level; ++l) {
    const MeshLevel& m = meshes_[l];
    operators_.push_back(std::make_unique<ElasticOperator>(m, spec_.nu));
    const double total = spec_.response == Response::StaticPlastic ? 1.0 : spec_.load;
    loads_.push_back(spec_.response == Response::Dynamic ? tip_load(m, total) : distribute_midspan_load(m, total));
    level0_maps_.push_back(m.level0_node_map());
  }
  if (spec_.model == ModelKind::Heterogeneous) {
    basis_ = std::make_shared<const KLBasis>(
        build_kl_basis_2d(spec_.covariance, spec_.kl_fraction, spec_.kl_max_terms));
  }
}

std::vector<int> BeamModel::top_edge_nodes() const {
  const MeshLevel& m = meshes_[0];
  std::vector<int> ids;
  for (int i = 0; i <= m.nx; ++i) ids.push_back(m.node_id(i, m.ny));
  return ids;
}

std::vector<int> BeamModel::midspan_column_nodes() const {
  const MeshLevel& m = meshes_[0];
  std::vector<int> ids;
  for (int j = 0; j <= m.ny; ++j) ids.push_back(m.node_id(m.nx / 2, j));
  return ids;
}

int BeamModel::history_entry(int column_index, int increment) const {
  return level0_node_count() + column_index * spec_.schedule.increments() + increment;
}

BeamModel::Draw BeamModel::draw(RandomStream& rng) const {
  Draw d;
  switch (spec_.model) {
    case ModelKind::Homogeneous:
      d.homogeneous_E = sample_homogeneous(spec_.gamma, rng.uniform());
      break;
    case ModelKind::Heterogeneous:
      d.field.seed_id = rng.key();
      d.field.xi.resize(static_cast<Eigen::Index>(basis_->n_terms()));
      for (Eigen::Index k = 0; k < d.field.xi.size(); ++k) d.field.xi[k] = rng.normal();
      break;
    case ModelKind::Fixed:
      d.homogeneous_E = spec_.fixed_E;
      break;
  }
  return d;
}

Eigen::VectorXd BeamModel::young_modulus(const Draw& d, int level) const {
  const MeshLevel& m = meshes_.at(level);
  if (spec_.model == ModelKind::Heterogeneous) return field_on_elements(*basis_, d.field, m, spec_.gamma);
  return Eigen::VectorXd::Constant(m.element_count(), d.homogeneous_E);
}

namespace {

struct BeamWorkspace : Workspace {
  std::vector<std::unique_ptr<StaticSolver>> statics;
  std::vector<std::unique_ptr<DynamicSolver>> dynamics;
  std::vector<std::unique_ptr<PlasticSolver>> plastics;
  std::unique_ptr<MultigridSolver> multigrid;
};

}  // namespace

BeamSampler::BeamSampler(std::shared_ptr<const BeamModel> model, double frequency_hz)
    : model_(std::move(model)), frequency_(frequency_hz) {
  if (!model_) throw ContractError("BeamSampler: null model");
  if (!(frequency_hz >= 0.0)) throw ConfigError("frequency must be non-negative");
}

int BeamSampler::response_size() const {
  int n = model_->level0_node_count();
  if (model_->spec().response == Response::StaticPlastic) {
    n += static_cast<int>(model_->midspan_column_nodes().size()) * model_->spec().schedule.increments();
  }
  return n;
}

std::vector<int> BeamSampler::report_entries() const {
  std::vector<int> e = model_->top_edge_nodes();
  for (int k = model_->level0_node_count(); k < response_size(); ++k) e.push_back(k);
  return e;
}

std::unique_ptr<Workspace> BeamSampler::make_workspace() const {
  auto ws = std::make_unique<BeamWorkspace>();
  const int levels = model_->max_level() + 1;
  for (int l = 0; l < levels; ++l) {
    ws->statics.push_back(std::make_unique<StaticSolver>());
    ws->dynamics.push_back(std::make_unique<DynamicSolver>());
  }
  ws->plastics.resize(levels);
  return ws;
}

Eigen::VectorXd BeamSampler::solve(int level, const Eigen::VectorXd& E, Workspace& base) const {
  auto& ws = dynamic_cast<BeamWorkspace&>(base);
  const BeamModel& bm = *model_;
  const BeamProblemSpec& spec = bm.spec();
  const MeshLevel& mesh = bm.mesh(level);
  const auto& map = bm.level0_map(level);
  const int n0 = bm.level0_node_count();
  Eigen::VectorXd out(response_size());

  switch (spec.response) {
    case Response::StaticElastic: {
      if (!ws.multigrid) {
        std::vector<const ElasticOperator*> ops;
        for (int l = 0; l <= bm.max_level(); ++l) ops.push_back(&bm.elastic(l));
        ws.multigrid = std::make_unique<MultigridSolver>(std::move(ops));
      }
      const Eigen::VectorXd u = ws.multigrid->solve(level, E, mesh.restrict_to_free(bm.load(level)));
      for (int k = 0; k < n0; ++k) {
        const int d = mesh.free_index[2 * map[k] + 1];
        out[k] = d >= 0 ? -u[d] : 0.0;
      }
      break;
    }
    case Response::Dynamic: {
      const Eigen::MatrixXd r = frf(level, E, {frequency_}, base);
      out = r.col(0);
      break;
    }
    case Response::StaticPlastic: {
      if (!ws.plastics[level]) ws.plastics[level] = std::make_unique<PlasticSolver>(mesh);
      const PlasticMaterial mat = PlasticMaterial::with_hardening_ratio(E, spec.nu, spec.sigma_y, spec.hardening_ratio);
      std::vector<int> observed;
      for (int id0 : bm.midspan_column_nodes()) observed.push_back(map[id0]);
      const PlasticResponse resp = ws.plastics[level]->solve(mat, spec.schedule, bm.load(level), observed);
      for (int k = 0; k < n0; ++k) out[k] = -resp.final_displacement[2 * map[k] + 1];
      const int n_inc = static_cast<int>(resp.deflection.rows());
      for (int c = 0; c < static_cast<int>(observed.size()); ++c) {
        for (int i = 0; i < n_inc; ++i) out[bm.history_entry(c, i)] = resp.deflection(i, c);
      }
      break;
    }
  }
  return out;
}

Eigen::MatrixXd BeamSampler::frf(int level, const Eigen::VectorXd& E, const std::vector<double>& freqs,
                                 Workspace& base) const {
  auto& ws = dynamic_cast<BeamWorkspace&>(base);
  const BeamModel& bm = *model_;
  if (bm.spec().response != Response::Dynamic) throw ContractError("frf: dynamic response only");
  const MeshLevel& mesh = bm.mesh(level);
  const auto& map = bm.level0_map(level);
  const int n0 = bm.level0_node_count();
  const auto& op = bm.elastic(level);
  const SparseMatrixd K = op.stiffness(E);
  const SparseMatrixd M = op.mass(bm.spec().rho);
  const Eigen::VectorXd f = mesh.restrict_to_free(bm.load(level));
  Eigen::MatrixXd out(n0, static_cast<Eigen::Index>(freqs.size()));
  for (std::size_t q = 0; q < freqs.size(); ++q) {
    const Eigen::VectorXcd u = ws.dynamics[level]->solve(K, M, f, bm.spec().eta, freqs[q]);
    for (int k = 0; k < n0; ++k) {
      const int d = mesh.free_index[2 * map[k] + 1];
      out(k, static_cast<Eigen::Index>(q)) = d >= 0 ? std::abs(u[d]) : 0.0;
    }
  }
  return out;
}

void BeamSampler::evaluate(int level, bool coupled, RandomStream& rng, Workspace& ws, SampleOutput& out) const {
  if (level < 0 || level > max_level()) throw ContractError("evaluate: level out of range");
  if (coupled && level == 0) throw ContractError("evaluate: level 0 has no coarser level");
  const BeamModel::Draw d = model_->draw(rng);
  out.fine = solve(level, model_->young_modulus(d, level), ws);
  if (coupled) {
    out.coarse = solve(level - 1, model_->young_modulus(d, level - 1), ws);
  } else {
    out.coarse.resize(0);
  }
}

}  // namespace uq
