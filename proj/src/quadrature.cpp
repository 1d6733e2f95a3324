// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#include "igacoh/quadrature.hpp"

#include <cmath>
#include <map>

namespace igacoh {

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  // Newton iteration on Legendre polynomials from the Chebyshev initial guess.
  GaussRule r;
  r.points.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.points[static_cast<std::size_t>(n - 1 - i)] = x;
    r.weights[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return cache.emplace(n, std::move(r)).first->second;
}

DirectionQuadrature direction_quadrature(const KnotVector& kv, int n_points) {
  const GaussRule& gr = gauss_legendre(n_points);
  const ReducedKnotVector rkv(kv);
  const int p = kv.degree();
  DirectionQuadrature dq;
  dq.n_points = n_points;
  for (int mu : kv.element_spans()) {
    DirectionQuadrature::Span s;
    const double a = kv.knot(mu), b = kv.knot(mu + 1);
    s.x.resize(static_cast<std::size_t>(n_points));
    s.w.resize(static_cast<std::size_t>(n_points));
    s.bval.resize(static_cast<std::size_t>(n_points * (p + 1)));
    s.bder.resize(static_cast<std::size_t>(n_points * (p + 1)));
    s.dval.resize(static_cast<std::size_t>(n_points * p));
    for (int q = 0; q < n_points; ++q) {
      const double x = 0.5 * (a + b) + 0.5 * (b - a) * gr.points[static_cast<std::size_t>(q)];
      s.x[static_cast<std::size_t>(q)] = x;
      s.w[static_cast<std::size_t>(q)] = 0.5 * (b - a) * gr.weights[static_cast<std::size_t>(q)];
      double ders[2 * 32];
      int first = 0;
      kv.basis_values_derivs(x, 1, first, ders);
      s.first_b = first;
      for (int j = 0; j <= p; ++j) {
        s.bval[static_cast<std::size_t>(q * (p + 1) + j)] = ders[j];
        s.bder[static_cast<std::size_t>(q * (p + 1) + j)] = ders[p + 1 + j];
      }
      double dv[32];
      int firstd = 0;
      rkv.basis_values(x, firstd, dv);
      s.first_d = firstd;
      for (int j = 0; j < p; ++j)
        s.dval[static_cast<std::size_t>(q * p + j)] = dv[j];
    }
    dq.spans.push_back(std::move(s));
  }
  return dq;
}

PatchQuadrature::PatchQuadrature(const Patch& patch, int points_per_direction)
    : npts_(points_per_direction) {
  for (int d = 0; d < 3; ++d)
    dq_[static_cast<std::size_t>(d)] = direction_quadrature(
        patch.knot_vectors()[static_cast<std::size_t>(d)], points_per_direction);
}

}  // namespace igacoh
