#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uq/elastic.hpp"
#include "uq/gamma.hpp"
#include "uq/mesh.hpp"
#include "uq/mlmc.hpp"
#include "uq/plastic.hpp"
#include "uq/random_field.hpp"

namespace uq {

enum class Response { StaticElastic, StaticPlastic, Dynamic };
enum class ModelKind { Homogeneous, Heterogeneous, Fixed };

std::string to_string(Response r);
std::string to_string(ModelKind m);
Response parse_response(const std::string& s);
ModelKind parse_model(const std::string& s);

struct BeamProblemSpec {
  Response response = Response::StaticElastic;
  ModelKind model = ModelKind::Homogeneous;
  GammaParams gamma = concrete_preset();
  double fixed_E = 30e9;
  BeamGeometry geometry;
  double nu = 0.15;
  double rho = 2500.0;
  double eta = 0.03;
  double load = 1e7;  // N, total transverse load (elastic responses)
  LoadSchedule schedule;
  double sigma_y = 240e6;
  double hardening_ratio = 0.01;
  CovarianceSpec covariance;
  double kl_fraction = 0.9;
  int kl_max_terms = 400;
  int max_level = 4;

  /// Paper defaults per response: clamped-clamped concrete (static elastic), clamped-clamped
  /// steel 1 mm wide (elastoplastic), concrete cantilever (dynamic).
  static BeamProblemSpec defaults(Response response, ModelKind model);
  void validate() const;
};

/// Meshes, operators, loads and KL basis shared by every sampler of one problem.
class BeamModel {
 public:
  explicit BeamModel(const BeamProblemSpec& spec);

  const BeamProblemSpec& spec() const { return spec_; }
  int max_level() const { return spec_.max_level; }
  const MeshLevel& mesh(int level) const { return meshes_.at(level); }
  const ElasticOperator& elastic(int level) const { return *operators_.at(level); }
  const Eigen::VectorXd& load(int level) const { return loads_.at(level); }
  const KLBasis* basis() const { return basis_.get(); }
  /// Level-0 node ids -> node ids on `level`.
  const std::vector<int>& level0_map(int level) const { return level0_maps_.at(level); }

  int level0_node_count() const { return meshes_[0].node_count(); }
  std::vector<int> top_edge_nodes() const;      // level-0 ids, left to right
  std::vector<int> midspan_column_nodes() const; // level-0 ids, bottom to top
  int history_entry(int column_index, int increment) const;

  /// Draws the Young's modulus per element for `level`, consuming the stream exactly as in
  /// evaluate(): one uniform (homogeneous), one normal per KL term (heterogeneous), none (fixed).
  struct Draw {
    double homogeneous_E = 0.0;
    FieldSample field;
  };
  Draw draw(RandomStream& rng) const;
  Eigen::VectorXd young_modulus(const Draw& d, int level) const;

 private:
  BeamProblemSpec spec_;
  std::vector<MeshLevel> meshes_;
  std::vector<std::unique_ptr<ElasticOperator>> operators_;
  std::vector<Eigen::VectorXd> loads_;
  std::vector<std::vector<int>> level0_maps_;
  std::shared_ptr<const KLBasis> basis_;
};

/// Sampler over a BeamModel. Response layout: transverse (downward) deflection, or |u_y| for
/// the dynamic response, at every level-0 node; for the elastoplastic response followed by the
/// per-increment deflection history of the midspan node column.
class BeamSampler : public Sampler {
 public:
  BeamSampler(std::shared_ptr<const BeamModel> model, double frequency_hz = 0.0);

  int max_level() const override { return model_->max_level(); }
  int response_size() const override;
  int candidate_count() const override { return model_->level0_node_count(); }
  double work(int level) const override { return model_->mesh(level).element_count(); }
  /// Top-edge nodes, plus the whole deflection history for the elastoplastic response.
  std::vector<int> report_entries() const override;
  std::unique_ptr<Workspace> make_workspace() const override;
  void evaluate(int level, bool coupled, RandomStream& rng, Workspace& ws, SampleOutput& out) const override;

  const BeamModel& model() const { return *model_; }
  double frequency() const { return frequency_; }

  /// Response on one level for a given modulus field.
  Eigen::VectorXd solve(int level, const Eigen::VectorXd& E, Workspace& ws) const;
  /// |u_y| at level-0 nodes over a frequency grid for one modulus field (dynamic only).
  Eigen::MatrixXd frf(int level, const Eigen::VectorXd& E, const std::vector<double>& freqs, Workspace& ws) const;

 private:
  std::shared_ptr<const BeamModel> model_;
  double frequency_;
};

}  // namespace uq
