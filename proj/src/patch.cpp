// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#include "igacoh/patch.hpp"

#include <cmath>
#include <sstream>

namespace igacoh {

Patch::Patch(std::string name, std::array<KnotVector, 3> kvs,
             std::vector<Vec3> control_points, std::vector<double> weights,
             Subdomain subdomain)
    : name_(std::move(name)),
      kvs_(std::move(kvs)),
      points_(std::move(control_points)),
      weights_(std::move(weights)),
      subdomain_(subdomain) {
  const int p = kvs_[0].degree();
  if (kvs_[1].degree() != p || kvs_[2].degree() != p)
    throw ArgumentError("patch '" + name_ + "': equal degree required in all directions");
  grid_.dims = {kvs_[0].num_basis(), kvs_[1].num_basis(), kvs_[2].num_basis()};
  if (static_cast<int>(points_.size()) != grid_.size())
    throw ArgumentError("patch '" + name_ + "': control grid size mismatch");
  if (!weights_.empty()) {
    if (weights_.size() != points_.size())
      throw ArgumentError("patch '" + name_ + "': weight count mismatch");
    for (double w : weights_)
      if (!(w > 0.0))
        throw ArgumentError("patch '" + name_ + "': weights must be positive");
  }
}

namespace {

struct UniEval {
  int first;
  double val[32];
  double der[32];
};

void eval_dir(const KnotVector& kv, double x, UniEval& e) {
  double ders[2 * 32];
  kv.basis_values_derivs(x, 1, e.first, ders);
  const int p = kv.degree();
  for (int j = 0; j <= p; ++j) {
    e.val[j] = ders[j];
    e.der[j] = ders[p + 1 + j];
  }
}

}  // namespace

GeometryEval Patch::eval_geometry(const Vec3& xi) const {
  UniEval u[3];
  for (int d = 0; d < 3; ++d) eval_dir(kvs_[static_cast<std::size_t>(d)], xi[d], u[d]);
  const int p = degree();

  // Homogeneous accumulation: N = sum w_i P_i B_i, W = sum w_i B_i, and the
  // same for the parametric derivatives. Polynomial maps use w = 1.
  Vec3 N = Vec3::Zero();
  Vec3 dN[3] = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  double W = 0.0;
  double dW[3] = {0.0, 0.0, 0.0};
  const bool rat = rational();
  for (int c = 0; c <= p; ++c)
    for (int b = 0; b <= p; ++b)
      for (int a = 0; a <= p; ++a) {
        const Index idx = grid_.flat(u[0].first + a, u[1].first + b, u[2].first + c);
        const double w = rat ? weights_[static_cast<std::size_t>(idx)] : 1.0;
        const Vec3& P = points_[static_cast<std::size_t>(idx)];
        const double v0 = u[0].val[a], v1 = u[1].val[b], v2 = u[2].val[c];
        const double base = w * v0 * v1 * v2;
        N += base * P;
        W += base;
        const double g0 = w * u[0].der[a] * v1 * v2;
        const double g1 = w * v0 * u[1].der[b] * v2;
        const double g2 = w * v0 * v1 * u[2].der[c];
        dN[0] += g0 * P;
        dN[1] += g1 * P;
        dN[2] += g2 * P;
        dW[0] += g0;
        dW[1] += g1;
        dW[2] += g2;
      }

  GeometryEval g;
  g.x = N / W;
  for (int d = 0; d < 3; ++d) g.J.col(d) = (dN[d] - g.x * dW[d]) / W;
  g.detJ = g.J.determinant();
  if (!(g.detJ > 0.0)) {
    std::ostringstream os;
    os << "degenerate geometry in patch '" << name_ << "' at xi = (" << xi[0]
       << ", " << xi[1] << ", " << xi[2] << "): detJ = " << g.detJ;
    throw DegenerateGeometryError(os.str());
  }
  return g;
}

Vec3 Patch::eval_point(const Vec3& xi) const {
  UniEval u[3];
  for (int d = 0; d < 3; ++d) {
    kvs_[static_cast<std::size_t>(d)].basis_values(xi[d], u[d].first, u[d].val);
  }
  const int p = degree();
  Vec3 N = Vec3::Zero();
  double W = 0.0;
  const bool rat = rational();
  for (int c = 0; c <= p; ++c)
    for (int b = 0; b <= p; ++b)
      for (int a = 0; a <= p; ++a) {
        const Index idx = grid_.flat(u[0].first + a, u[1].first + b, u[2].first + c);
        const double w = rat ? weights_[static_cast<std::size_t>(idx)] : 1.0;
        const double base = w * u[0].val[a] * u[1].val[b] * u[2].val[c];
        N += base * points_[static_cast<std::size_t>(idx)];
        W += base;
      }
  return N / W;
}

namespace {

/// Single-knot insertion along one direction of a homogeneous control grid.
/// Standard Boehm step; preserves the geometry exactly.
void insert_knot_dir(int dir, double t, std::array<KnotVector, 3>& kvs,
                     std::vector<Eigen::Vector4d>& pw, TensorGrid& grid) {
  const KnotVector& kv = kvs[static_cast<std::size_t>(dir)];
  const int p = kv.degree();
  const int n = kv.num_basis();
  const int mu = kv.find_span(t);

  TensorGrid ng = grid;
  ng.dims[static_cast<std::size_t>(dir)] = n + 1;
  std::vector<Eigen::Vector4d> np(static_cast<std::size_t>(ng.size()));

  const auto old_at = [&](int i, int j, int k) -> const Eigen::Vector4d& {
    return pw[static_cast<std::size_t>(grid.flat(i, j, k))];
  };
  for (int k = 0; k < ng.dims[2]; ++k)
    for (int j = 0; j < ng.dims[1]; ++j)
      for (int i = 0; i < ng.dims[0]; ++i) {
        int idx[3] = {i, j, k};
        const int r = idx[dir];
        Eigen::Vector4d v;
        if (r <= mu - p) {
          v = old_at(idx[0], idx[1], idx[2]);
        } else if (r > mu) {
          idx[dir] = r - 1;
          v = old_at(idx[0], idx[1], idx[2]);
        } else {
          const double denom = kv.knot(r + p) - kv.knot(r);
          const double alpha = (t - kv.knot(r)) / denom;
          int lo[3] = {idx[0], idx[1], idx[2]};
          lo[dir] = r - 1;
          v = alpha * old_at(idx[0], idx[1], idx[2]) +
              (1.0 - alpha) * old_at(lo[0], lo[1], lo[2]);
        }
        np[static_cast<std::size_t>(ng.flat(i, j, k))] = v;
      }

  std::vector<double> nk = kv.knots();
  nk.insert(nk.begin() + mu + 1, t);
  kvs[static_cast<std::size_t>(dir)] = KnotVector(p, std::move(nk));
  pw = std::move(np);
  grid = ng;
}

}  // namespace

Patch Patch::refined_uniform() const {
  std::array<KnotVector, 3> kvs = kvs_;
  TensorGrid grid = grid_;
  std::vector<Eigen::Vector4d> pw(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double w = rational() ? weights_[i] : 1.0;
    pw[i] << w * points_[i][0], w * points_[i][1], w * points_[i][2], w;
  }
  for (int d = 0; d < 3; ++d) {
    const std::vector<int> spans = kvs_[static_cast<std::size_t>(d)].element_spans();
    for (int mu : spans) {
      const double t = 0.5 * (kvs_[static_cast<std::size_t>(d)].knot(mu) +
                              kvs_[static_cast<std::size_t>(d)].knot(mu + 1));
      insert_knot_dir(d, t, kvs, pw, grid);
    }
  }
  std::vector<Vec3> pts(pw.size());
  std::vector<double> wts;
  if (rational()) wts.resize(pw.size());
  for (std::size_t i = 0; i < pw.size(); ++i) {
    pts[i] = pw[i].head<3>() / pw[i][3];
    if (rational()) wts[i] = pw[i][3];
  }
  return Patch(name_, std::move(kvs), std::move(pts), std::move(wts), subdomain_);
}

std::vector<ActiveBasis> eval_reference_basis(const TensorSplineSpace& space,
                                              const Vec3& xi) {
  std::vector<ActiveBasis> out(static_cast<std::size_t>(space.num_components()));
  for (int c = 0; c < space.num_components(); ++c) {
    ActiveBasis& ab = out[static_cast<std::size_t>(c)];
    ab.component = c;
    for (int d = 0; d < 3; ++d) {
      if (space.is_reduced(c, d)) {
        const ReducedKnotVector& rkv = space.reduced(d);
        int first = 0;
        rkv.basis_values(xi[d], first, ab.value[static_cast<std::size_t>(d)].data());
        ab.first[static_cast<std::size_t>(d)] = first;
        ab.count[static_cast<std::size_t>(d)] = rkv.knot_vector().degree() + 1;
      } else {
        const KnotVector& kv = space.knot_vector(d);
        UniEval u;
        eval_dir(kv, xi[d], u);
        ab.first[static_cast<std::size_t>(d)] = u.first;
        ab.count[static_cast<std::size_t>(d)] = kv.degree() + 1;
        for (int j = 0; j <= kv.degree(); ++j) {
          ab.value[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)] = u.val[j];
          ab.deriv[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)] = u.der[j];
        }
      }
    }
  }
  return out;
}

Vec3 pullback_vector(int form_degree, const GeometryEval& g, const Vec3& ref) {
  switch (form_degree) {
    case 0: return ref;
    case 1: return g.J.transpose().inverse() * ref;
    case 2: return (g.J * ref) / g.detJ;
    case 3: return ref / g.detJ;
    default: throw ArgumentError("form degree must be in 0..3");
  }
}

std::vector<std::pair<Index, Vec3>> pullback_basis(const Patch& patch,
                                                   const TensorSplineSpace& space,
                                                   const Vec3& xi) {
  const GeometryEval g = patch.eval_geometry(xi);
  const std::vector<ActiveBasis> ref = eval_reference_basis(space, xi);
  std::vector<std::pair<Index, Vec3>> out;
  const int k = space.form_degree();
  for (const ActiveBasis& ab : ref) {
    for (int kc = 0; kc < ab.count[2]; ++kc)
      for (int jc = 0; jc < ab.count[1]; ++jc)
        for (int ic = 0; ic < ab.count[0]; ++ic) {
          const double v = ab.value[0][static_cast<std::size_t>(ic)] *
                           ab.value[1][static_cast<std::size_t>(jc)] *
                           ab.value[2][static_cast<std::size_t>(kc)];
          Vec3 ref_vec = Vec3::Zero();
          if (k == 0 || k == 3)
            ref_vec[0] = v;
          else
            ref_vec[ab.component] = v;
          out.emplace_back(space.global_index(ab.component, ab.first[0] + ic,
                                              ab.first[1] + jc, ab.first[2] + kc),
                           pullback_vector(k, g, ref_vec));
        }
  }
  return out;
}

GrevilleLattice greville_lattice(const Patch& patch) {
  GrevilleLattice gl;
  for (int d = 0; d < 3; ++d) {
    gl.abscissae[static_cast<std::size_t>(d)] =
        greville_points(patch.knot_vectors()[static_cast<std::size_t>(d)]);
    gl.grid.dims[static_cast<std::size_t>(d)] =
        static_cast<int>(gl.abscissae[static_cast<std::size_t>(d)].size());
  }
  return gl;
}

LocalControlMesh control_mesh(const Patch& patch) {
  const GrevilleLattice gl = greville_lattice(patch);
  LocalControlMesh m;
  m.vertex_grid = gl.grid;
  m.vertices.resize(static_cast<std::size_t>(gl.grid.size()));
  for (int k = 0; k < gl.grid.dims[2]; ++k)
    for (int j = 0; j < gl.grid.dims[1]; ++j)
      for (int i = 0; i < gl.grid.dims[0]; ++i) {
        const Vec3 xi(gl.abscissae[0][static_cast<std::size_t>(i)],
                      gl.abscissae[1][static_cast<std::size_t>(j)],
                      gl.abscissae[2][static_cast<std::size_t>(k)]);
        m.vertices[static_cast<std::size_t>(gl.grid.flat(i, j, k))] =
            patch.eval_point(xi);
      }
  const auto& n = gl.grid.dims;
  m.cell_count[0] = static_cast<Index>(n[0] * n[1] * n[2]);
  m.cell_count[1] = static_cast<Index>((n[0] - 1) * n[1] * n[2] +
                                       n[0] * (n[1] - 1) * n[2] +
                                       n[0] * n[1] * (n[2] - 1));
  m.cell_count[2] = static_cast<Index>(n[0] * (n[1] - 1) * (n[2] - 1) +
                                       (n[0] - 1) * n[1] * (n[2] - 1) +
                                       (n[0] - 1) * (n[1] - 1) * n[2]);
  m.cell_count[3] = static_cast<Index>((n[0] - 1) * (n[1] - 1) * (n[2] - 1));
  return m;
}

}  // namespace igacoh
