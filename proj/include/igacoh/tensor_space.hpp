// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "igacoh/knots.hpp"
#include "igacoh/types.hpp"

namespace igacoh {

/// Lexicographic flattening of a 3D index grid, direction 1 fastest.
struct TensorGrid {
  std::array<int, 3> dims{0, 0, 0};
  int size() const { return dims[0] * dims[1] * dims[2]; }
  Index flat(int i, int j, int k) const {
    return static_cast<Index>(i + dims[0] * (j + dims[1] * k));
  }
  std::array<int, 3> unflat(Index f) const {
    const int i = static_cast<int>(f) % dims[0];
    const int j = (static_cast<int>(f) / dims[0]) % dims[1];
    const int k = static_cast<int>(f) / (dims[0] * dims[1]);
    return {i, j, k};
  }
};

/// One space S_p^k of the tensor-product spline de Rham sequence on a patch.
///
/// Scalar spaces (k = 0, 3) have one component, vector spaces (k = 1, 2)
/// three. Component c of S^1 lowers the degree in direction c (Curry-
/// Schoenberg basis on the reduced knot vector there); component c of S^2
/// lowers it in the two complementary directions; S^3 lowers all three.
/// DoFs are ordered component-major, lexicographic inside each component
/// with direction 1 fastest.
class TensorSplineSpace {
 public:
  TensorSplineSpace(std::array<KnotVector, 3> kvs, int form_degree);

  int form_degree() const { return k_; }
  int degree() const { return kvs_[0].degree(); }
  int num_components() const { return (k_ == 0 || k_ == 3) ? 1 : 3; }

  /// True when the univariate factor of component c in direction dir uses
  /// the reduced (degree-1, Curry-Schoenberg) basis.
  bool is_reduced(int c, int dir) const;

  const TensorGrid& component_grid(int c) const { return grids_[static_cast<std::size_t>(c)]; }
  Index component_offset(int c) const { return offsets_[static_cast<std::size_t>(c)]; }
  Index dim() const { return total_; }

  Index global_index(int c, int i, int j, int k) const {
    return component_offset(c) + component_grid(c).flat(i, j, k);
  }

  const KnotVector& knot_vector(int dir) const { return kvs_[static_cast<std::size_t>(dir)]; }
  const ReducedKnotVector& reduced(int dir) const { return reduced_[static_cast<std::size_t>(dir)]; }

 private:
  int k_;
  std::array<KnotVector, 3> kvs_;
  std::array<ReducedKnotVector, 3> reduced_;
  std::array<TensorGrid, 3> grids_;
  std::array<Index, 3> offsets_{0, 0, 0};
  Index total_ = 0;
};

/// Builds S_p^k from the degree-p knot vector triple.
TensorSplineSpace build_space(const std::array<KnotVector, 3>& kvs, int form_degree);

/// The three incidence matrices of the patch complex:
/// G : S^0 -> S^1 (gradient), C : S^1 -> S^2 (curl), D : S^2 -> S^3 (div),
/// all with entries in {-1, 0, +1} and C*G = 0, D*C = 0 exactly.
struct PatchIncidence {
  SpMatI G, C, D;
};

PatchIncidence patch_incidence(const std::array<KnotVector, 3>& kvs);

}  // namespace igacoh
