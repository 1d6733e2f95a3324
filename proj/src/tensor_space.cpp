// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#include "igacoh/tensor_space.hpp"

namespace igacoh {

namespace {

bool reduced_dir(int form_degree, int c, int dir) {
  switch (form_degree) {
    case 0: return false;
    case 1: return dir == c;
    case 2: return dir != c;
    case 3: return true;
    default: throw ArgumentError("form degree must be in 0..3");
  }
}

}  // namespace

TensorSplineSpace::TensorSplineSpace(std::array<KnotVector, 3> kvs, int form_degree)
    : k_(form_degree),
      kvs_(std::move(kvs)),
      reduced_{ReducedKnotVector(kvs_[0]), ReducedKnotVector(kvs_[1]),
               ReducedKnotVector(kvs_[2])} {
  if (k_ < 0 || k_ > 3) throw ArgumentError("form degree must be in 0..3");
  const int p = kvs_[0].degree();
  if (p < 1) throw ArgumentError("spline spaces need degree >= 1");
  if (kvs_[1].degree() != p || kvs_[2].degree() != p)
    throw ArgumentError("equal degree required in all directions");
  Index off = 0;
  for (int c = 0; c < num_components(); ++c) {
    TensorGrid g;
    for (int d = 0; d < 3; ++d) {
      const int n = kvs_[static_cast<std::size_t>(d)].num_basis();
      g.dims[static_cast<std::size_t>(d)] = reduced_dir(k_, c, d) ? n - 1 : n;
    }
    grids_[static_cast<std::size_t>(c)] = g;
    offsets_[static_cast<std::size_t>(c)] = off;
    off += g.size();
  }
  total_ = off;
}

bool TensorSplineSpace::is_reduced(int c, int dir) const {
  return reduced_dir(k_, c, dir);
}

TensorSplineSpace build_space(const std::array<KnotVector, 3>& kvs, int form_degree) {
  return TensorSplineSpace(kvs, form_degree);
}

PatchIncidence patch_incidence(const std::array<KnotVector, 3>& kvs) {
  const TensorSplineSpace s0(kvs, 0), s1(kvs, 1), s2(kvs, 2), s3(kvs, 3);
  PatchIncidence out;

  // Gradient: component d of G u holds the difference along direction d.
  {
    std::vector<TripI> t;
    const TensorGrid& v = s0.component_grid(0);
    for (int d = 0; d < 3; ++d) {
      const TensorGrid& g = s1.component_grid(d);
      for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
          for (int i = 0; i < g.dims[0]; ++i) {
            const Index row = s1.global_index(d, i, j, k);
            const int ii[3] = {i, j, k};
            int jj[3] = {i, j, k};
            jj[d] = ii[d] + 1;
            t.emplace_back(row, v.flat(i, j, k), -1);
            t.emplace_back(row, v.flat(jj[0], jj[1], jj[2]), 1);
          }
    }
    out.G.resize(s1.dim(), s0.dim());
    out.G.setFromTriplets(t.begin(), t.end());
  }

  // Curl: (curl u)_d = d_a u_b - d_b u_a with (d, a, b) cyclic.
  {
    std::vector<TripI> t;
    for (int d = 0; d < 3; ++d) {
      const int a = (d + 1) % 3, b = (d + 2) % 3;
      const TensorGrid& g = s2.component_grid(d);
      for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
          for (int i = 0; i < g.dims[0]; ++i) {
            const Index row = s2.global_index(d, i, j, k);
            const int m[3] = {i, j, k};
            int lo[3] = {i, j, k}, hi[3] = {i, j, k};
            // d_a u_b: difference of component b along direction a
            hi[a] = m[a] + 1;
            t.emplace_back(row, s1.global_index(b, lo[0], lo[1], lo[2]), -1);
            t.emplace_back(row, s1.global_index(b, hi[0], hi[1], hi[2]), 1);
            // -d_b u_a
            hi[a] = m[a];
            hi[b] = m[b] + 1;
            t.emplace_back(row, s1.global_index(a, lo[0], lo[1], lo[2]), 1);
            t.emplace_back(row, s1.global_index(a, hi[0], hi[1], hi[2]), -1);
          }
    }
    out.C.resize(s2.dim(), s1.dim());
    out.C.setFromTriplets(t.begin(), t.end());
  }

  // Divergence: sum of differences of component d along direction d.
  {
    std::vector<TripI> t;
    const TensorGrid& h = s3.component_grid(0);
    for (int k = 0; k < h.dims[2]; ++k)
      for (int j = 0; j < h.dims[1]; ++j)
        for (int i = 0; i < h.dims[0]; ++i) {
          const Index row = h.flat(i, j, k);
          for (int d = 0; d < 3; ++d) {
            int lo[3] = {i, j, k}, hi[3] = {i, j, k};
            hi[d] = lo[d] + 1;
            t.emplace_back(row, s2.global_index(d, lo[0], lo[1], lo[2]), -1);
            t.emplace_back(row, s2.global_index(d, hi[0], hi[1], hi[2]), 1);
          }
        }
    out.D.resize(s3.dim(), s2.dim());
    out.D.setFromTriplets(t.begin(), t.end());
  }

  return out;
}

}  // namespace igacoh
