// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#include "igacoh/knots.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace igacoh {

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : degree_(degree), knots_(std::move(knots)) {
  if (degree_ < 0) throw ArgumentError("knot vector degree must be >= 0");
  const int m = static_cast<int>(knots_.size());
  const int n = m - degree_ - 1;
  if (n < degree_ + 1)
    throw ArgumentError("knot vector too short: need n >= degree+1");
  for (int i = 0; i + 1 < m; ++i)
    if (knots_[i] > knots_[i + 1])
      throw ArgumentError("knot vector must be non-decreasing");
  for (int i = 0; i <= degree_; ++i) {
    if (knots_[i] != 0.0)
      throw ArgumentError("open knot vector: first knot 0 with multiplicity degree+1");
    if (knots_[m - 1 - i] != 1.0)
      throw ArgumentError("open knot vector: last knot 1 with multiplicity degree+1");
  }
  if (knots_[degree_ + 1] == 0.0 || knots_[m - degree_ - 2] == 1.0)
    throw ArgumentError("boundary knot multiplicity must be exactly degree+1");
  // Interior multiplicity at most degree keeps the Greville abscissae strict.
  int run = 1;
  for (int i = degree_ + 2; i < m - degree_ - 1; ++i) {
    run = (knots_[i] == knots_[i - 1]) ? run + 1 : 1;
    if (degree_ > 0 && run > degree_)
      throw ArgumentError("interior knot multiplicity exceeds degree");
  }
}

KnotVector KnotVector::uniform(int degree, int n_elements) {
  if (n_elements < 1) throw ArgumentError("need at least one element");
  std::vector<double> k;
  k.reserve(static_cast<std::size_t>(2 * (degree + 1) + n_elements - 1));
  for (int i = 0; i <= degree; ++i) k.push_back(0.0);
  for (int i = 1; i < n_elements; ++i)
    k.push_back(static_cast<double>(i) / n_elements);
  for (int i = 0; i <= degree; ++i) k.push_back(1.0);
  return KnotVector(degree, std::move(k));
}

int KnotVector::find_span(double x) const {
  const int n = num_basis();
  if (x >= knots_[static_cast<std::size_t>(n)]) return n - 1;
  if (x <= knots_[static_cast<std::size_t>(degree_)]) return degree_;
  auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + n + 1, x);
  return static_cast<int>(it - knots_.begin()) - 1;
}

void KnotVector::basis_values(double x, int& first, double* vals) const {
  const int p = degree_;
  const int mu = find_span(x);
  first = mu - p;
  vals[0] = 1.0;
  double left[32], right[32];
  assert(p < 32);
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots_[static_cast<std::size_t>(mu + 1 - j)];
    right[j] = knots_[static_cast<std::size_t>(mu + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = vals[r] / (right[r + 1] + left[j - r]);
      vals[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    vals[j] = saved;
  }
}

void KnotVector::basis_values_derivs(double x, int nders, int& first,
                                     double* ders) const {
  // Algorithm A2.3 from standard B-spline references (inverted triangle of
  // knot differences, then derivative recurrences).
  const int p = degree_;
  const int mu = find_span(x);
  first = mu - p;
  const int nd = std::min(nders, p);
  double ndu[32][32], a[2][32], left[32], right[32];
  assert(p < 32);
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots_[static_cast<std::size_t>(mu + 1 - j)];
    right[j] = knots_[static_cast<std::size_t>(mu + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= p; ++j) ders[j] = ndu[j][p];
  for (int k = 1; k <= nders; ++k)
    for (int j = 0; j <= p; ++j) ders[k * (p + 1) + j] = 0.0;
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders[k * (p + 1) + r] = d;
      std::swap(s1, s2);
    }
  }
  double factor = static_cast<double>(p);
  for (int k = 1; k <= nd; ++k) {
    for (int j = 0; j <= p; ++j) ders[k * (p + 1) + j] *= factor;
    factor *= static_cast<double>(p - k);
  }
}

double KnotVector::eval(int i, double x) const {
  const int n = num_basis();
  if (i < 0 || i >= n) throw ArgumentError("basis index out of range");
  if (x < 0.0 || x > 1.0) throw ArgumentError("evaluation point outside [0,1]");
  // Exact zero outside the support.
  if (x < knots_[static_cast<std::size_t>(i)] ||
      (x > knots_[static_cast<std::size_t>(i + degree_ + 1)]))
    return 0.0;
  int first = 0;
  double vals[32];
  basis_values(x, first, vals);
  if (i < first || i > first + degree_) return 0.0;
  return vals[i - first];
}

std::vector<int> KnotVector::element_spans() const {
  std::vector<int> spans;
  const int n = num_basis();
  for (int mu = degree_; mu <= n - 1; ++mu)
    if (knots_[static_cast<std::size_t>(mu)] <
        knots_[static_cast<std::size_t>(mu + 1)])
      spans.push_back(mu);
  return spans;
}

KnotVector KnotVector::refined_uniform() const {
  std::vector<double> out;
  out.reserve(knots_.size() * 2);
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    out.push_back(knots_[i]);
    if (knots_[i] < knots_[i + 1])
      out.push_back(0.5 * (knots_[i] + knots_[i + 1]));
  }
  out.push_back(knots_.back());
  return KnotVector(degree_, std::move(out));
}

ReducedKnotVector::ReducedKnotVector(const KnotVector& parent)
    : reduced_(parent.degree() - 1,
               std::vector<double>(parent.knots().begin() + 1,
                                   parent.knots().end() - 1)) {
  if (parent.degree() < 1)
    throw ArgumentError("reduced knot vector needs parent degree >= 1");
  const int p = parent.degree();
  const int nn = reduced_.num_basis();
  scale_.resize(static_cast<std::size_t>(nn));
  for (int i = 0; i < nn; ++i) {
    const double len = reduced_.knot(i + p) - reduced_.knot(i);
    assert(len > 0.0);
    scale_[static_cast<std::size_t>(i)] = static_cast<double>(p) / len;
  }
}

double ReducedKnotVector::eval(int i, double x) const {
  return scale_[static_cast<std::size_t>(i)] * reduced_.eval(i, x);
}

void ReducedKnotVector::basis_values(double x, int& first, double* vals) const {
  reduced_.basis_values(x, first, vals);
  for (int j = 0; j <= reduced_.degree(); ++j)
    vals[j] *= scale_[static_cast<std::size_t>(first + j)];
}

SpMatI derivative_incidence(const KnotVector& kv) {
  const int n = kv.num_basis();
  SpMatI g(n - 1, n);
  std::vector<TripI> trips;
  trips.reserve(static_cast<std::size_t>(2 * (n - 1)));
  for (int j = 0; j < n - 1; ++j) {
    trips.emplace_back(j, j, -1);
    trips.emplace_back(j, j + 1, 1);
  }
  g.setFromTriplets(trips.begin(), trips.end());
  return g;
}

std::vector<double> greville_points(const KnotVector& kv) {
  const int p = kv.degree();
  if (p < 1) throw ArgumentError("greville points need degree >= 1");
  const int n = kv.num_basis();
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 1; j <= p; ++j) s += kv.knot(i + j);
    g[static_cast<std::size_t>(i)] = s / p;
  }
  return g;
}

double eval_bspline(const KnotVector& kv, int i, double x) { return kv.eval(i, x); }

double eval_curry_schoenberg(const KnotVector& kv, int i, double x) {
  return ReducedKnotVector(kv).eval(i, x);
}

}  // namespace igacoh
