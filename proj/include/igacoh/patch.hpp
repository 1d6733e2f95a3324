// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "igacoh/tensor_space.hpp"
#include "igacoh/types.hpp"

namespace igacoh {

struct GeometryEval {
  Vec3 x;       ///< physical point F(xi)
  Mat3 J;       ///< Jacobian, J(a,b) = d x_a / d xi_b
  double detJ;  ///< determinant, required positive
};

/// One spline (or NURBS) patch: geometry map plus subdomain label.
///
/// Control points are stored lexicographically, direction 1 fastest, matching
/// the S^0 space of the map knot vectors. Weights, when present, make the map
/// rational; solution spaces stay polynomial either way.
class Patch {
 public:
  Patch(std::string name, std::array<KnotVector, 3> kvs,
        std::vector<Vec3> control_points, std::vector<double> weights,
        Subdomain subdomain);

  const std::string& name() const { return name_; }
  int degree() const { return kvs_[0].degree(); }
  const std::array<KnotVector, 3>& knot_vectors() const { return kvs_; }
  const std::vector<Vec3>& control_points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  bool rational() const { return !weights_.empty(); }
  Subdomain subdomain() const { return subdomain_; }
  void set_subdomain(Subdomain s) { subdomain_ = s; }

  const TensorGrid& control_grid() const { return grid_; }

  /// Map, Jacobian and determinant at a parametric point; throws
  /// DegenerateGeometryError when detJ <= 0.
  GeometryEval eval_geometry(const Vec3& xi) const;

  /// Map value only (no Jacobian check), for cheap point queries.
  Vec3 eval_point(const Vec3& xi) const;

  /// Patch with every knot span halved; control points are recomputed by
  /// knot insertion so the geometry is unchanged.
  Patch refined_uniform() const;

 private:
  std::string name_;
  std::array<KnotVector, 3> kvs_;
  std::vector<Vec3> points_;
  std::vector<double> weights_;
  Subdomain subdomain_;
  TensorGrid grid_;
};

/// Reference values of all basis functions of one component of S_p^k that are
/// active at a parametric point, along with their tensor indices.
struct ActiveBasis {
  int component = 0;
  std::array<int, 3> first{0, 0, 0};   ///< first active univariate index per direction
  std::array<int, 3> count{0, 0, 0};   ///< number of active functions per direction
  /// value[d][j]: univariate factor value in direction d, j = 0..count[d]-1
  std::array<std::array<double, 32>, 3> value{};
  /// deriv[d][j]: derivative of the univariate factor (degree-p factors only)
  std::array<std::array<double, 32>, 3> deriv{};
};

/// Evaluates the univariate factors of every component of `space` at xi.
/// Derivatives are filled for non-reduced directions (used for gradients of
/// S^0 and curls of S^1 components).
std::vector<ActiveBasis> eval_reference_basis(const TensorSplineSpace& space,
                                              const Vec3& xi);

/// Pullback of one reference value to physical space at a prepared geometry
/// evaluation: k=0 identity, k=1 covariant J^{-T}, k=2 Piola J/detJ,
/// k=3 scaling 1/detJ.
Vec3 pullback_vector(int form_degree, const GeometryEval& g, const Vec3& ref);

/// Physical values of every active basis function of `space` at xi. Rows are
/// (global DoF index, physical value) pairs; scalars use component x only.
std::vector<std::pair<Index, Vec3>> pullback_basis(const Patch& patch,
                                                   const TensorSplineSpace& space,
                                                   const Vec3& xi);

/// Greville lattice of the patch (the auxiliary control-mesh vertices are the
/// images of these points under the geometry map).
struct GrevilleLattice {
  std::array<std::vector<double>, 3> abscissae;
  TensorGrid grid;
};

GrevilleLattice greville_lattice(const Patch& patch);

/// Local control mesh of a single patch: mapped Greville vertices plus the
/// lattice cell counts. Cells are in bijection with the spline DoFs: the
/// local cell ordering *is* the DoF ordering of the matching space.
struct LocalControlMesh {
  std::vector<Vec3> vertices;           ///< lex order, direction 1 fastest
  TensorGrid vertex_grid;
  std::array<Index, 4> cell_count{0, 0, 0, 0};  ///< vertices, edges, quads, hexes
};

LocalControlMesh control_mesh(const Patch& patch);

}  // namespace igacoh
