#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

namespace uq {

enum class Clamping { LeftOnly, BothEnds };

/// Rectangular beam in plane stress. `width` is the out-of-plane thickness.
struct BeamGeometry {
  double length = 2.5;
  double height = 0.25;
  double width = 1.0;
  Clamping clamping = Clamping::BothEnds;
  /// Elements through the height on level 0; sets the level-0 element size.
  int coarse_elements_height = 4;

  void validate() const;
};

using ElementConnectivity = Eigen::Matrix<int, Eigen::Dynamic, 4, Eigen::RowMajor>;

/// One level of the nested hierarchy of regular square-element meshes.
///
/// Nodes are numbered row-major: node (i, j) with 0 <= i <= nx along the length and
/// 0 <= j <= ny along the height has id j * (nx + 1) + i. DOFs are node-major
/// (2 * id for u_x, 2 * id + 1 for u_y). Element (ex, ey) has id ey * nx + ex and
/// counterclockwise nodes starting at its lower-left corner.
struct MeshLevel {
  int level = 0;
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  BeamGeometry geometry;

  Eigen::MatrixX2d nodes;
  ElementConnectivity elements;

  std::vector<int> constrained_dofs;
  /// Full DOF index -> free DOF index, or -1 when constrained.
  std::vector<int> free_index;
  int free_dof_count = 0;

  int node_count() const { return (nx + 1) * (ny + 1); }
  int element_count() const { return nx * ny; }
  int total_dofs() const { return 2 * node_count(); }
  int node_id(int i, int j) const { return j * (nx + 1) + i; }
  Eigen::Vector2d element_midpoint(int e) const;

  /// Id on this level of the level-0 node (i0, j0): the nested-node injection.
  int node_from_level0(int i0, int j0) const;
  /// For each level-0 node id, the matching node id on this level.
  std::vector<int> level0_node_map() const;
  int level0_nx() const { return nx >> level; }
  int level0_ny() const { return ny >> level; }

  Eigen::VectorXd restrict_to_free(const Eigen::VectorXd& full) const;
  template <class Vector>
  Vector expand_to_full(const Vector& free) const {
    Vector full = Vector::Zero(total_dofs());
    for (int d = 0; d < total_dofs(); ++d) {
      if (free_index[d] >= 0) full[d] = free[free_index[d]];
    }
    return full;
  }
};

/// Level-0 element size is height / coarse_elements_height; it halves with every level.
/// Throws ConfigError when the beam length is not a whole number of square elements.
MeshLevel build_mesh(const BeamGeometry& geom, int level);

/// 2x2 Gauss rule on [-1, 1]^2, weights all 1.
inline constexpr double kGauss = 0.57735026918962576451;  // 1 / sqrt(3)
inline constexpr std::array<std::array<double, 2>, 4> kGaussPoints = {
    {{-kGauss, -kGauss}, {kGauss, -kGauss}, {kGauss, kGauss}, {-kGauss, kGauss}}};

/// Bilinear shape functions of a quadrilateral and the strain-displacement matrix B = L N.
template <class Scalar = double>
struct ShapeEval {
  Eigen::Matrix<Scalar, 4, 1> N;
  Eigen::Matrix<Scalar, 3, 8> B;
  Scalar det_jacobian;
};

/// Shape functions for an element given by its 4 counterclockwise corner coordinates.
/// Returns det_jacobian <= 0 for degenerate or clockwise elements; callers decide.
template <class Scalar = double>
ShapeEval<Scalar> shape_functions(const Eigen::Matrix<Scalar, 4, 2>& corners, Scalar xi, Scalar eta) {
  constexpr double sx[4] = {-1, 1, 1, -1};
  constexpr double sy[4] = {-1, -1, 1, 1};
  ShapeEval<Scalar> out;
  Eigen::Matrix<Scalar, 2, 4> dN_local;
  for (int a = 0; a < 4; ++a) {
    out.N[a] = Scalar(0.25) * (Scalar(1) + sx[a] * xi) * (Scalar(1) + sy[a] * eta);
    dN_local(0, a) = Scalar(0.25) * sx[a] * (Scalar(1) + sy[a] * eta);
    dN_local(1, a) = Scalar(0.25) * sy[a] * (Scalar(1) + sx[a] * xi);
  }
  const Eigen::Matrix<Scalar, 2, 2> J = dN_local * corners;
  out.det_jacobian = J.determinant();
  const Eigen::Matrix<Scalar, 2, 4> dN = J.inverse() * dN_local;

  out.B.setZero();
  for (int a = 0; a < 4; ++a) {
    out.B(0, 2 * a) = dN(0, a);
    out.B(1, 2 * a + 1) = dN(1, a);
    out.B(2, 2 * a) = dN(1, a);
    out.B(2, 2 * a + 1) = dN(0, a);
  }
  return out;
}

ShapeEval<double> shape_functions(const MeshLevel& mesh, int element, double xi, double eta);
Eigen::Matrix<double, 4, 2> element_corners(const MeshLevel& mesh, int element);

/// Transverse (downward, -y) nodal forces on the midspan node column summing to total_force.
/// Interior nodes carry total_force / ny, the top and bottom nodes half of that.
Eigen::VectorXd distribute_midspan_load(const MeshLevel& mesh, double total_force);

/// Transverse (downward) nodal forces on the free right edge, same weighting as the midspan load.
Eigen::VectorXd tip_load(const MeshLevel& mesh, double total_force);

}  // namespace uq
