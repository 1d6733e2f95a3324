// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "igacoh/types.hpp"

namespace igacoh {

/// Open knot vector on [0,1] for B-splines of a fixed degree.
///
/// The first and last knots are required to appear with multiplicity exactly
/// degree+1, interior knots with multiplicity at most degree. All spline
/// spaces in the library are built from these, with the reduced (degree-1)
/// vector obtained by dropping the first and last knot.
class KnotVector {
 public:
  KnotVector(int degree, std::vector<double> knots);

  /// Open uniform knot vector with `n_elements` equal spans on [0,1].
  static KnotVector uniform(int degree, int n_elements);

  int degree() const { return degree_; }
  /// Number of basis functions n (= #knots - degree - 1).
  int num_basis() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  const std::vector<double>& knots() const { return knots_; }
  double knot(int i) const { return knots_[static_cast<std::size_t>(i)]; }

  /// Index mu of the span containing x: knots[mu] <= x < knots[mu+1], with
  /// the left-limit convention at x = 1 (clamps to the last nonempty span).
  int find_span(double x) const;

  /// All degree+1 basis values that may be nonzero at x. `first` receives the
  /// index of the first of them; `vals` must hold degree+1 doubles.
  void basis_values(double x, int& first, double* vals) const;

  /// Values and first `nders` derivatives of the nonzero basis functions.
  /// ders is row-major (nders+1) x (degree+1); row 0 holds the values.
  void basis_values_derivs(double x, int nders, int& first, double* ders) const;

  /// Scalar wrapper: B_i(x) for a single 0-based basis index, exact zero
  /// outside the support [knots[i], knots[i+degree+1]].
  double eval(int i, double x) const;

  /// Indices mu of the nonempty spans, in increasing order.
  std::vector<int> element_spans() const;

  /// Knot vector with every nonempty span split at its midpoint.
  KnotVector refined_uniform() const;

  bool operator==(const KnotVector& other) const = default;

 private:
  int degree_;
  std::vector<double> knots_;
};

/// Curry-Schoenberg basis on the reduced knot vector: the degree-1 lowering
/// that turns spline differentiation into the incidence matrix G.
class ReducedKnotVector {
 public:
  explicit ReducedKnotVector(const KnotVector& parent);

  /// Degree-(p-1) open knot vector (parent without first/last knot).
  const KnotVector& knot_vector() const { return reduced_; }
  int num_basis() const { return reduced_.num_basis(); }

  /// D_i(x) = scale_i * B_i^{p-1}(x), normalized so every D_i integrates to 1.
  double eval(int i, double x) const;
  double scale(int i) const { return scale_[static_cast<std::size_t>(i)]; }

  /// Nonzero D values at x (degree p-1 -> p of them).
  void basis_values(double x, int& first, double* vals) const;

 private:
  KnotVector reduced_;
  std::vector<double> scale_;
};

/// Banded (n-1) x n matrix with rows [-1, 1]: coefficients of the spline
/// derivative in the Curry-Schoenberg basis.
SpMatI derivative_incidence(const KnotVector& kv);

/// Greville points g_i = mean of degree consecutive interior knots.
std::vector<double> greville_points(const KnotVector& kv);

double eval_bspline(const KnotVector& kv, int i, double x);
double eval_curry_schoenberg(const KnotVector& kv, int i, double x);

}  // namespace igacoh
