// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "igacoh/complex.hpp"

namespace igacoh {

/// BFS spanning tree of the control-mesh vertex-edge graph.
struct SpanningTree {
  Index root = 0;
  std::vector<Index> parent_vertex;  ///< -1 at the root
  std::vector<Index> parent_edge;    ///< -1 at the root
  std::vector<char> in_tree;         ///< per edge
  std::vector<Index> bfs_order;      ///< visit order
  Index num_tree_edges = 0;
};

/// Integer 1-cochain on the interface surface, curl-free by construction.
struct SurfaceGenerator {
  std::vector<std::pair<Index, std::int64_t>> edge_values;  ///< volume edge ids, sorted
  int component = 0;   ///< connected component of the interface
  Index leftover_edge = -1;  ///< the tree-cotree leftover edge that seeded it
};

/// One element of the cohomology basis: the integer cochain on the control
/// mesh restricted to the insulator, and its lift to spline coefficients.
struct HarmonicGenerator {
  std::vector<std::pair<Index, std::int64_t>> cochain;     ///< insulator edges
  std::vector<std::pair<Index, double>> spline_coeffs;     ///< same ids, iso applied
  int provenance = -1;   ///< index of the surface generator it came from
  Index support_size = 0;
};

struct CohomologyBasis {
  std::vector<HarmonicGenerator> generators;
  bool rank_deficient = false;
  Index candidate_count = 0;  ///< lazy candidates before filtering
};

/// Generators of the first cohomology group of the interface surface:
/// 2 - chi per connected component, via the dual tree-cotree construction,
/// in exact integer arithmetic.
std::vector<SurfaceGenerator> surface_cohomology(const CubicalComplex& cx,
                                                 const InterfaceComplex& ic);

/// Step 1: extend a surface cocycle by zero to the conductor edges and apply
/// the conductor-restricted curl, giving a divergence-free integer 2-cochain
/// supported on conductor quads (zero trace on the interface).
std::vector<std::int64_t> thicken_to_current(const CubicalComplex& cx,
                                             const SurfaceGenerator& g);

/// Step 2: BFS spanning tree of the whole control mesh. root < 0 picks the
/// lowest vertex id. Throws TopologyError when the graph is disconnected.
SpanningTree build_tree(const CubicalComplex& cx, Index root = -1);

/// Step 3: solve curl h = j with h = 0 on tree edges by local elimination
/// over the quads (each step resolves a quad with one unknown cotree edge).
/// Throws TopologyError on a pathological tree (elimination stalls), with the
/// number of unresolved edges in the message.
std::vector<std::int64_t> stt_solve(const CubicalComplex& cx,
                                    const SpanningTree& tree,
                                    const std::vector<std::int64_t>& j);

/// Step 4: restrict to the insulator, normalize away any discrete gradient
/// with a trace on the domain boundary, and lift to spline coefficients via
/// the inverse diagonal isomorphism.
HarmonicGenerator restrict_and_lift(const CubicalComplex& cx,
                                    const std::vector<std::int64_t>& h,
                                    int provenance);

/// Filters the 2g lazy candidates to an independent basis by pairing against
/// the fundamental cycles of the insulator cotree.
CohomologyBasis filter_lazy(const CubicalComplex& cx,
                            std::vector<HarmonicGenerator> candidates);

/// The whole pipeline; `tree_root` is the retry knob for pathological trees.
CohomologyBasis compute_cohomology_basis(const CubicalComplex& cx,
                                         Index tree_root = -1);

/// Signed sum of a cochain along the fundamental cycle closed by `cotree_edge`
/// over `tree`; integer and exact.
std::int64_t cycle_circulation(const CubicalComplex& cx, const SpanningTree& tree,
                               const std::vector<std::pair<Index, std::int64_t>>& cochain,
                               Index cotree_edge);

}  // namespace igacoh
