// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "igacoh/multipatch.hpp"

namespace igacoh {

/// Local spline DoF -> global cell id and relative orientation sign, one
/// array per form degree k. The local cell ordering coincides with the DoF
/// ordering of S_p^k on the patch, so these arrays are the DoF bijections.
struct PatchDofMap {
  std::array<std::vector<Index>, 4> cell;
  std::array<std::vector<std::int8_t>, 4> sign;
};

/// Global control-mesh complex of a multipatch geometry.
///
/// Cells carry one global id per geometric entity (interface entities are
/// merged), edges are oriented from lower to higher vertex id, quads by the
/// lowest-vertex rule, hexes by the outward normal. B1, B2, B3 are the
/// oriented boundary matrices; G, C, D the glued spline incidence matrices;
/// iso_sign the diagonal isomorphisms between the two.
class CubicalComplex {
 public:
  Index num_cells(int k) const { return counts_[static_cast<std::size_t>(k)]; }

  std::vector<Vec3> vertex_xyz;
  std::vector<std::array<Index, 2>> edge_vertices;  ///< (lo, hi)
  std::vector<std::array<Index, 4>> quad_cycle;     ///< lattice cycle of first owner
  std::vector<std::array<Index, 8>> hex_corners;    ///< owner lattice corner order

  SpMatI B1, B2, B3;
  SpMatI G, C, D;

  std::vector<PatchDofMap> patch_dofs;
  std::array<std::vector<std::int8_t>, 4> iso_sign;
  std::vector<Index> owner_patch_of_hex;

  /// Adjacency (derived, label-independent).
  std::vector<std::vector<std::pair<Index, Index>>> vertex_nbrs;  ///< (other vertex, edge), sorted
  std::vector<std::vector<Index>> edge_quads;
  std::vector<std::vector<Index>> quad_hexes;

  /// Label-independent boundary flags (cells of the domain boundary surface).
  std::array<std::vector<char>, 4> on_boundary;

  /// Subdomain data; recomputable via set_labels for material relabeling.
  std::vector<Subdomain> hex_label;
  std::array<std::vector<char>, 4> touches_conductor;
  std::array<std::vector<char>, 4> touches_insulator;

  void set_labels(const std::vector<Subdomain>& per_patch);

  bool is_interface_quad(Index q) const {
    return quad_hexes[static_cast<std::size_t>(q)].size() == 2 &&
           touches_conductor[2][static_cast<std::size_t>(q)] &&
           touches_insulator[2][static_cast<std::size_t>(q)];
  }

  /// Coboundary operators of the control mesh (gradient, curl, divergence).
  SpMatI grad_op() const { return SpMatI(B1.transpose()); }
  SpMatI curl_op() const { return SpMatI(B2.transpose()); }
  SpMatI div_op() const { return SpMatI(B3.transpose()); }

  /// Applies the diagonal isomorphism I_h^k (an involution) entrywise.
  template <typename Vec>
  Vec apply_iso(int k, const Vec& u) const {
    Vec out = u;
    const auto& s = iso_sign[static_cast<std::size_t>(k)];
    for (Index i = 0; i < static_cast<Index>(out.size()); ++i)
      out[i] *= s[static_cast<std::size_t>(i)];
    return out;
  }

  Index find_edge(Index a, Index b) const;

 private:
  friend CubicalComplex glue(const MultipatchGeometry&);
  std::array<Index, 4> counts_{0, 0, 0, 0};
};

/// Builds the glued global complex. Throws GluingError on non-conforming
/// interfaces, TopologyError on inconsistent cell data.
CubicalComplex glue(const MultipatchGeometry& geom);

/// Checks that the restriction of B1^T, B2^T, B3^T to every patch equals the
/// Kronecker incidence matrices composed with the recorded diagonal signs.
/// Exact sparse equality; throws Error with a description on mismatch.
void verify_patchwise_incidence(const CubicalComplex& cx,
                                const MultipatchGeometry& geom);

/// Sub-complex of the conductor/insulator interface surface with its own
/// boundary operators and injections into the volume complex.
struct InterfaceComplex {
  std::vector<Index> vertices, edges, quads;     ///< volume ids, ascending
  std::vector<Index> vertex_local, edge_local;   ///< dense volume->surface maps (-1 outside)
  SpMatI B1s, B2s;
  std::vector<int> quad_component;               ///< connected component per surface quad
  int num_components = 0;
  std::vector<int> component_euler;              ///< V - E + F per component
};

InterfaceComplex extract_interface(const CubicalComplex& cx);

/// Sparse triplet dump: one "row col value" line per entry, 1-based, sorted
/// by (row, col).
void dump_triplets(const SpMatI& m, std::ostream& os);

/// Control mesh dump: vertex coordinates then cell vertex lists, 1-based.
void dump_control_mesh(const CubicalComplex& cx, std::ostream& os);

}  // namespace igacoh
