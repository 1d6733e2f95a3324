// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "igacoh/patch.hpp"

namespace igacoh {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int n);

/// Per-span univariate quadrature data for one knot vector: mapped points,
/// mapped weights, and the degree-p basis values/derivatives plus the
/// Curry-Schoenberg values at each point.
struct DirectionQuadrature {
  struct Span {
    std::vector<double> x, w;
    // row-major [point][func], p+1 columns for B, p for D
    std::vector<double> bval, bder, dval;
    int first_b = 0, first_d = 0;
  };
  std::vector<Span> spans;
  int n_points = 0;
};

DirectionQuadrature direction_quadrature(const KnotVector& kv, int n_points);

/// Tensor quadrature over the elements of a patch.
class PatchQuadrature {
 public:
  PatchQuadrature(const Patch& patch, int points_per_direction);

  const std::array<DirectionQuadrature, 3>& directions() const { return dq_; }
  int points_per_direction() const { return npts_; }
  /// Number of elements (nonempty span triples).
  int num_elements() const {
    return static_cast<int>(dq_[0].spans.size() * dq_[1].spans.size() *
                            dq_[2].spans.size());
  }
  std::array<int, 3> element_spans(int e) const {
    const int n0 = static_cast<int>(dq_[0].spans.size());
    const int n1 = static_cast<int>(dq_[1].spans.size());
    return {e % n0, (e / n0) % n1, e / (n0 * n1)};
  }

 private:
  std::array<DirectionQuadrature, 3> dq_;
  int npts_;
};

}  // namespace igacoh
