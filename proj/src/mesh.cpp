#include "uq/mesh.hpp"

#include <cmath>
#include <string>

#include "uq/errors.hpp"

namespace uq {

void BeamGeometry::validate() const {
  if (!(length > 0.0) || !(height > 0.0) || !(width > 0.0)) {
    throw ConfigError("beam geometry: length, height and width must be positive");
  }
  if (coarse_elements_height < 1) {
    throw ConfigError("beam geometry: coarse_elements_height must be at least 1");
  }
}

MeshLevel build_mesh(const BeamGeometry& geom, int level) {
  geom.validate();
  if (level < 0) throw ConfigError("build_mesh: level must be non-negative");
  if (level > 12) throw ConfigError("build_mesh: level " + std::to_string(level) + " is too fine");

  const int ny0 = geom.coarse_elements_height;
  const double h0 = geom.height / ny0;
  const double ratio = geom.length / h0;
  const long nx0 = std::lround(ratio);
  if (nx0 < 1 || std::abs(ratio - static_cast<double>(nx0)) > 1e-9 * ratio) {
    throw ConfigError("build_mesh: beam length " + std::to_string(geom.length) +
                      " is not a whole number of square elements of size " + std::to_string(h0));
  }

  MeshLevel m;
  m.level = level;
  m.geometry = geom;
  m.nx = static_cast<int>(nx0) << level;
  m.ny = ny0 << level;
  m.h = h0 / static_cast<double>(1 << level);

  // Coordinates from integer indices so that nested nodes coincide bit-for-bit.
  m.nodes.resize(m.node_count(), 2);
  for (int j = 0; j <= m.ny; ++j) {
    for (int i = 0; i <= m.nx; ++i) {
      const int id = m.node_id(i, j);
      m.nodes(id, 0) = geom.length * static_cast<double>(i) / m.nx;
      m.nodes(id, 1) = geom.height * static_cast<double>(j) / m.ny;
    }
  }

  m.elements.resize(m.element_count(), 4);
  for (int ey = 0; ey < m.ny; ++ey) {
    for (int ex = 0; ex < m.nx; ++ex) {
      const int e = ey * m.nx + ex;
      m.elements.row(e) << m.node_id(ex, ey), m.node_id(ex + 1, ey), m.node_id(ex + 1, ey + 1),
          m.node_id(ex, ey + 1);
    }
  }

  std::vector<bool> fixed(m.total_dofs(), false);
  for (int j = 0; j <= m.ny; ++j) {
    for (int i : {0, m.nx}) {
      if (i == m.nx && geom.clamping == Clamping::LeftOnly) continue;
      const int id = m.node_id(i, j);
      fixed[2 * id] = fixed[2 * id + 1] = true;
    }
  }
  m.free_index.assign(m.total_dofs(), -1);
  for (int d = 0; d < m.total_dofs(); ++d) {
    if (fixed[d]) {
      m.constrained_dofs.push_back(d);
    } else {
      m.free_index[d] = m.free_dof_count++;
    }
  }
  return m;
}

Eigen::Vector2d MeshLevel::element_midpoint(int e) const {
  const int ex = e % nx;
  const int ey = e / nx;
  return {geometry.length * (ex + 0.5) / nx, geometry.height * (ey + 0.5) / ny};
}

int MeshLevel::node_from_level0(int i0, int j0) const {
  return node_id(i0 << level, j0 << level);
}

std::vector<int> MeshLevel::level0_node_map() const {
  const int nx0 = level0_nx();
  const int ny0 = level0_ny();
  std::vector<int> map((nx0 + 1) * (ny0 + 1));
  for (int j = 0; j <= ny0; ++j) {
    for (int i = 0; i <= nx0; ++i) map[j * (nx0 + 1) + i] = node_from_level0(i, j);
  }
  return map;
}

Eigen::VectorXd MeshLevel::restrict_to_free(const Eigen::VectorXd& full) const {
  if (full.size() != total_dofs()) throw ContractError("restrict_to_free: size mismatch");
  Eigen::VectorXd out(free_dof_count);
  for (int d = 0; d < total_dofs(); ++d) {
    if (free_index[d] >= 0) out[free_index[d]] = full[d];
  }
  return out;
}

Eigen::Matrix<double, 4, 2> element_corners(const MeshLevel& mesh, int element) {
  if (element < 0 || element >= mesh.element_count()) throw ContractError("element index out of range");
  Eigen::Matrix<double, 4, 2> c;
  for (int a = 0; a < 4; ++a) c.row(a) = mesh.nodes.row(mesh.elements(element, a));
  return c;
}

ShapeEval<double> shape_functions(const MeshLevel& mesh, int element, double xi, double eta) {
  if (std::abs(xi) > 1.0 || std::abs(eta) > 1.0) {
    throw ContractError("shape_functions: local coordinates must lie in [-1, 1]^2");
  }
  auto s = shape_functions<double>(element_corners(mesh, element), xi, eta);
  if (!(s.det_jacobian > 0.0)) throw ContractError("shape_functions: degenerate element");
  return s;
}

namespace {

Eigen::VectorXd column_load(const MeshLevel& mesh, int column, double total_force) {
  if (!std::isfinite(total_force)) throw ConfigError("load magnitude must be finite");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.total_dofs());
  const double interior = total_force / mesh.ny;
  for (int j = 0; j <= mesh.ny; ++j) {
    const double w = (j == 0 || j == mesh.ny) ? 0.5 * interior : interior;
    f[2 * mesh.node_id(column, j) + 1] = -w;
  }
  return f;
}

}  // namespace

Eigen::VectorXd distribute_midspan_load(const MeshLevel& mesh, double total_force) {
  if (mesh.geometry.clamping != Clamping::BothEnds) {
    throw ConfigError("midspan load requires a beam clamped at both ends");
  }
  if (mesh.nx % 2 != 0) throw ConfigError("midspan load: no node column at midspan (odd nx)");
  return column_load(mesh, mesh.nx / 2, total_force);
}

Eigen::VectorXd tip_load(const MeshLevel& mesh, double total_force) {
  if (mesh.geometry.clamping != Clamping::LeftOnly) {
    throw ConfigError("tip load requires a cantilever (left-only clamping)");
  }
  return column_load(mesh, mesh.nx, total_force);
}

}  // namespace uq
