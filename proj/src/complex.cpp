// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#include "igacoh/complex.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace igacoh {

Index MultipatchGeometry::find_patch(const std::string& name) const {
  for (std::size_t i = 0; i < patches.size(); ++i)
    if (patches[i].name() == name) return static_cast<Index>(i);
  throw ArgumentError("no patch named '" + name + "'");
}

namespace {

constexpr double kMergeTol = 1e-10;

struct UnionFind {
  std::vector<Index> parent;
  explicit UnionFind(Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  Index find(Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

struct PairHash {
  std::size_t operator()(const std::array<Index, 2>& k) const {
    return std::hash<std::uint64_t>()(
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k[0])) << 32) |
        static_cast<std::uint32_t>(k[1]));
  }
};

struct QuadKeyHash {
  std::size_t operator()(const std::array<Index, 4>& k) const {
    std::size_t h = 0;
    for (Index v : k) h = h * 1000003u + static_cast<std::size_t>(v);
    return h;
  }
};

/// Face lattice accessor: face f = 2*d + s of a patch lattice with dims n.
/// In-face directions are the two others in increasing order.
struct FaceLattice {
  int d, s, u_dir, v_dir;
  std::array<int, 3> dims;
  int nu() const { return dims[static_cast<std::size_t>(u_dir)]; }
  int nv() const { return dims[static_cast<std::size_t>(v_dir)]; }
  std::array<int, 3> point(int iu, int iv) const {
    std::array<int, 3> idx{};
    idx[static_cast<std::size_t>(d)] = (s == 0) ? 0 : dims[static_cast<std::size_t>(d)] - 1;
    idx[static_cast<std::size_t>(u_dir)] = iu;
    idx[static_cast<std::size_t>(v_dir)] = iv;
    return idx;
  }
};

FaceLattice make_face(int face, const std::array<int, 3>& dims) {
  FaceLattice fl;
  fl.d = face / 2;
  fl.s = face % 2;
  fl.u_dir = (fl.d == 0) ? 1 : 0;
  fl.v_dir = (fl.d == 2) ? 1 : 2;
  fl.dims = dims;
  return fl;
}

/// The lowest-vertex orientation rule for a quad cycle: returns +1 when the
/// canonical oriented traversal (start at the minimal id, proceed toward the
/// incident neighbor with the smaller id) runs along the stored cycle
/// direction, -1 when it runs against it.
int cycle_rule_sign(const std::array<Index, 4>& c) {
  int pos = 0;
  for (int i = 1; i < 4; ++i)
    if (c[static_cast<std::size_t>(i)] < c[static_cast<std::size_t>(pos)]) pos = i;
  const Index next = c[static_cast<std::size_t>((pos + 1) % 4)];
  const Index prev = c[static_cast<std::size_t>((pos + 3) % 4)];
  return (next < prev) ? 1 : -1;
}

/// Canonical oriented traversal of a quad per the rule above.
std::array<Index, 4> oriented_cycle(const std::array<Index, 4>& c) {
  int pos = 0;
  for (int i = 1; i < 4; ++i)
    if (c[static_cast<std::size_t>(i)] < c[static_cast<std::size_t>(pos)]) pos = i;
  std::array<Index, 4> out{};
  const int step = (cycle_rule_sign(c) == 1) ? 1 : 3;
  for (int i = 0; i < 4; ++i)
    out[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>((pos + i * step) % 4)];
  return out;
}

}  // namespace

CubicalComplex glue(const MultipatchGeometry& geom) {
  const Index np = static_cast<Index>(geom.patches.size());
  if (np == 0) throw ArgumentError("empty multipatch geometry");

  // Local control meshes and flat vertex offsets.
  std::vector<LocalControlMesh> local(static_cast<std::size_t>(np));
  std::vector<Index> voffset(static_cast<std::size_t>(np) + 1, 0);
  for (Index p = 0; p < np; ++p) {
    local[static_cast<std::size_t>(p)] = control_mesh(geom.patches[static_cast<std::size_t>(p)]);
    voffset[static_cast<std::size_t>(p) + 1] =
        voffset[static_cast<std::size_t>(p)] +
        static_cast<Index>(local[static_cast<std::size_t>(p)].vertices.size());
  }
  const Index total_local = voffset[static_cast<std::size_t>(np)];

  // Interface face pairs: explicit list, or auto-detection by matching the
  // four corner points of each patch face.
  std::vector<InterfaceSpec> pairs = geom.interfaces;
  if (pairs.empty()) {
    // Cluster the 8 corner vertices of every patch by distance.
    std::vector<Vec3> corners;
    std::vector<std::array<Index, 2>> corner_owner;  // (patch, corner bits)
    for (Index p = 0; p < np; ++p) {
      const auto& m = local[static_cast<std::size_t>(p)];
      const auto& n = m.vertex_grid.dims;
      for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const Index li = m.vertex_grid.flat(dx ? n[0] - 1 : 0, dy ? n[1] - 1 : 0,
                                                dz ? n[2] - 1 : 0);
            corners.push_back(m.vertices[static_cast<std::size_t>(li)]);
            corner_owner.push_back({p, static_cast<Index>(dx + 2 * dy + 4 * dz)});
          }
    }
    const Index nc = static_cast<Index>(corners.size());
    UnionFind cuf(nc);
    for (Index i = 0; i < nc; ++i)
      for (Index j = i + 1; j < nc; ++j)
        if ((corners[static_cast<std::size_t>(i)] - corners[static_cast<std::size_t>(j)])
                .norm() <= 1e-9)
          cuf.unite(i, j);
    std::vector<Index> cluster(static_cast<std::size_t>(nc));
    for (Index i = 0; i < nc; ++i) cluster[static_cast<std::size_t>(i)] = cuf.find(i);

    const auto corner_cluster = [&](Index p, int dx, int dy, int dz) {
      return cluster[static_cast<std::size_t>(p * 8 + dx + 2 * dy + 4 * dz)];
    };
    std::map<std::array<Index, 4>, std::vector<std::pair<Index, int>>> face_map;
    for (Index p = 0; p < np; ++p) {
      for (int f = 0; f < 6; ++f) {
        const int d = f / 2, s = f % 2;
        std::array<Index, 4> key{};
        int idx = 0;
        for (int b = 0; b < 2; ++b)
          for (int a = 0; a < 2; ++a) {
            int delta[3];
            delta[d] = s;
            delta[(d == 0) ? 1 : 0] = a;
            delta[(d == 2) ? 1 : 2] = b;
            key[static_cast<std::size_t>(idx++)] =
                corner_cluster(p, delta[0], delta[1], delta[2]);
          }
        std::sort(key.begin(), key.end());
        face_map[key].emplace_back(p, f);
      }
    }
    for (const auto& [key, faces] : face_map) {
      if (faces.size() > 2) {
        std::ostringstream os;
        os << "more than two patch faces share the same corner set:";
        for (auto [p, f] : faces)
          os << " " << geom.patches[static_cast<std::size_t>(p)].name() << "/face" << f;
        throw GluingError(os.str());
      }
      if (faces.size() == 2)
        pairs.push_back({faces[0].first, faces[0].second, faces[1].first,
                         faces[1].second});
    }
  }

  // Merge interface vertices with a full conformity check per face pair.
  UnionFind uf(total_local);
  for (const InterfaceSpec& is : pairs) {
    const auto& ma = local[static_cast<std::size_t>(is.patch_a)];
    const auto& mb = local[static_cast<std::size_t>(is.patch_b)];
    const FaceLattice fa = make_face(is.face_a, ma.vertex_grid.dims);
    const FaceLattice fb = make_face(is.face_b, mb.vertex_grid.dims);
    const auto xa = [&](int iu, int iv) {
      const auto idx = fa.point(iu, iv);
      return ma.vertices[static_cast<std::size_t>(ma.vertex_grid.flat(idx[0], idx[1], idx[2]))];
    };
    const auto xb = [&](int iu, int iv) {
      const auto idx = fb.point(iu, iv);
      return mb.vertices[static_cast<std::size_t>(mb.vertex_grid.flat(idx[0], idx[1], idx[2]))];
    };
    // Try the eight lattice symmetries of the rectangle.
    int found_swap = -1, found_fu = 0, found_fv = 0;
    for (int swap = 0; swap < 2 && found_swap < 0; ++swap) {
      const int nu_b = swap ? fb.nv() : fb.nu();
      const int nv_b = swap ? fb.nu() : fb.nv();
      if (nu_b != fa.nu() || nv_b != fa.nv()) continue;
      for (int fu = 0; fu < 2 && found_swap < 0; ++fu)
        for (int fv = 0; fv < 2 && found_swap < 0; ++fv) {
          const auto xb_t = [&](int iu, int iv) {
            int a = fu ? fa.nu() - 1 - iu : iu;
            int b = fv ? fa.nv() - 1 - iv : iv;
            return swap ? xb(b, a) : xb(a, b);
          };
          bool corners_ok = true;
          for (int cb = 0; cb < 2 && corners_ok; ++cb)
            for (int ca = 0; ca < 2 && corners_ok; ++ca)
              corners_ok = (xa(ca * (fa.nu() - 1), cb * (fa.nv() - 1)) -
                            xb_t(ca * (fa.nu() - 1), cb * (fa.nv() - 1)))
                               .norm() <= 1e-9;
          if (corners_ok) {
            found_swap = swap;
            found_fu = fu;
            found_fv = fv;
          }
        }
    }
    const auto face_pair_name = [&]() {
      std::ostringstream os;
      os << geom.patches[static_cast<std::size_t>(is.patch_a)].name() << "/face"
         << is.face_a << " <-> "
         << geom.patches[static_cast<std::size_t>(is.patch_b)].name() << "/face"
         << is.face_b;
      return os.str();
    };
    if (found_swap < 0)
      throw GluingError("interface corners do not match: " + face_pair_name());
    double worst = 0.0;
    for (int iv = 0; iv < fa.nv(); ++iv)
      for (int iu = 0; iu < fa.nu(); ++iu) {
        int a = found_fu ? fa.nu() - 1 - iu : iu;
        int b = found_fv ? fa.nv() - 1 - iv : iv;
        const int bu = found_swap ? b : a;
        const int bv = found_swap ? a : b;
        worst = std::max(worst, (xa(iu, iv) - xb(bu, bv)).norm());
      }
    if (worst > kMergeTol) {
      std::ostringstream os;
      os << "non-conforming interface " << face_pair_name()
         << ": max vertex mismatch " << worst;
      throw GluingError(os.str());
    }
    for (int iv = 0; iv < fa.nv(); ++iv)
      for (int iu = 0; iu < fa.nu(); ++iu) {
        int a = found_fu ? fa.nu() - 1 - iu : iu;
        int b = found_fv ? fa.nv() - 1 - iv : iv;
        const int bu = found_swap ? b : a;
        const int bv = found_swap ? a : b;
        const auto ia = fa.point(iu, iv);
        const auto ib = fb.point(bu, bv);
        uf.unite(voffset[static_cast<std::size_t>(is.patch_a)] +
                     ma.vertex_grid.flat(ia[0], ia[1], ia[2]),
                 voffset[static_cast<std::size_t>(is.patch_b)] +
                     mb.vertex_grid.flat(ib[0], ib[1], ib[2]));
      }
  }

  // Global vertex ids: patch-major lexicographic first appearance of each
  // union-find class (merged ids resolve to the smallest).
  CubicalComplex cx;
  std::vector<Index> global_of_root(static_cast<std::size_t>(total_local), -1);
  std::vector<std::vector<Index>> vmap(static_cast<std::size_t>(np));
  for (Index p = 0; p < np; ++p) {
    const auto& m = local[static_cast<std::size_t>(p)];
    auto& map = vmap[static_cast<std::size_t>(p)];
    map.resize(m.vertices.size());
    for (Index li = 0; li < static_cast<Index>(m.vertices.size()); ++li) {
      const Index root = uf.find(voffset[static_cast<std::size_t>(p)] + li);
      Index& g = global_of_root[static_cast<std::size_t>(root)];
      if (g < 0) {
        g = static_cast<Index>(cx.vertex_xyz.size());
        cx.vertex_xyz.push_back(m.vertices[static_cast<std::size_t>(li)]);
      }
      map[static_cast<std::size_t>(li)] = g;
    }
  }

  // Per-patch cell enumeration in spline DoF order.
  cx.patch_dofs.resize(static_cast<std::size_t>(np));
  std::unordered_map<std::array<Index, 2>, Index, PairHash> edge_ids;
  std::unordered_map<std::array<Index, 4>, Index, QuadKeyHash> quad_ids;

  for (Index p = 0; p < np; ++p) {
    const auto& m = local[static_cast<std::size_t>(p)];
    const auto& n = m.vertex_grid.dims;
    PatchDofMap& dm = cx.patch_dofs[static_cast<std::size_t>(p)];
    const auto gid = [&](int i, int j, int k) {
      return vmap[static_cast<std::size_t>(p)]
                 [static_cast<std::size_t>(m.vertex_grid.flat(i, j, k))];
    };

    dm.cell[0].reserve(static_cast<std::size_t>(m.cell_count[0]));
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i) {
          dm.cell[0].push_back(gid(i, j, k));
          dm.sign[0].push_back(1);
        }

    for (int d = 0; d < 3; ++d) {
      std::array<int, 3> dims = n;
      dims[static_cast<std::size_t>(d)] -= 1;
      for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
          for (int i = 0; i < dims[0]; ++i) {
            int hi[3] = {i, j, k};
            hi[d] += 1;
            const Index t = gid(i, j, k);
            const Index h = gid(hi[0], hi[1], hi[2]);
            if (t == h)
              throw TopologyError("repeated vertex in an edge of patch '" +
                                  geom.patches[static_cast<std::size_t>(p)].name() + "'");
            const std::array<Index, 2> key{std::min(t, h), std::max(t, h)};
            auto [it, inserted] =
                edge_ids.try_emplace(key, static_cast<Index>(cx.edge_vertices.size()));
            if (inserted) cx.edge_vertices.push_back(key);
            dm.cell[1].push_back(it->second);
            dm.sign[1].push_back(static_cast<std::int8_t>(t < h ? 1 : -1));
          }
    }

    for (int d = 0; d < 3; ++d) {
      const int a = (d + 1) % 3, b = (d + 2) % 3;
      std::array<int, 3> dims = n;
      dims[static_cast<std::size_t>(a)] -= 1;
      dims[static_cast<std::size_t>(b)] -= 1;
      for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
          for (int i = 0; i < dims[0]; ++i) {
            int ia[3] = {i, j, k}, iab[3] = {i, j, k}, ib[3] = {i, j, k};
            ia[a] += 1;
            iab[a] += 1;
            iab[b] += 1;
            ib[b] += 1;
            const std::array<Index, 4> cyc{gid(i, j, k), gid(ia[0], ia[1], ia[2]),
                                           gid(iab[0], iab[1], iab[2]),
                                           gid(ib[0], ib[1], ib[2])};
            std::array<Index, 4> key = cyc;
            std::sort(key.begin(), key.end());
            if (key[0] == key[1] || key[1] == key[2] || key[2] == key[3])
              throw TopologyError("repeated vertex in a quad of patch '" +
                                  geom.patches[static_cast<std::size_t>(p)].name() + "'");
            auto [it, inserted] =
                quad_ids.try_emplace(key, static_cast<Index>(cx.quad_cycle.size()));
            if (inserted) cx.quad_cycle.push_back(cyc);
            dm.cell[2].push_back(it->second);
            dm.sign[2].push_back(static_cast<std::int8_t>(cycle_rule_sign(cyc)));
          }
    }

    {
      std::array<int, 3> dims = {n[0] - 1, n[1] - 1, n[2] - 1};
      for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
          for (int i = 0; i < dims[0]; ++i) {
            std::array<Index, 8> corn{};
            for (int dz = 0; dz < 2; ++dz)
              for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx)
                  corn[static_cast<std::size_t>(dx + 2 * dy + 4 * dz)] =
                      gid(i + dx, j + dy, k + dz);
            dm.cell[3].push_back(static_cast<Index>(cx.hex_corners.size()));
            dm.sign[3].push_back(1);
            cx.hex_corners.push_back(corn);
            cx.owner_patch_of_hex.push_back(p);
          }
    }
  }

  cx.counts_ = {static_cast<Index>(cx.vertex_xyz.size()),
                static_cast<Index>(cx.edge_vertices.size()),
                static_cast<Index>(cx.quad_cycle.size()),
                static_cast<Index>(cx.hex_corners.size())};

  // Diagonal isomorphism signs: the owner (first, lowest-id) patch fixes the
  // orientation of each glued spline DoF.
  for (int k = 0; k < 4; ++k)
    cx.iso_sign[static_cast<std::size_t>(k)].assign(
        static_cast<std::size_t>(cx.counts_[static_cast<std::size_t>(k)]), 0);
  for (Index p = 0; p < np; ++p) {
    const PatchDofMap& dm = cx.patch_dofs[static_cast<std::size_t>(p)];
    for (int k = 0; k < 4; ++k)
      for (std::size_t i = 0; i < dm.cell[static_cast<std::size_t>(k)].size(); ++i) {
        auto& s = cx.iso_sign[static_cast<std::size_t>(k)][static_cast<std::size_t>(
            dm.cell[static_cast<std::size_t>(k)][i])];
        if (s == 0) s = dm.sign[static_cast<std::size_t>(k)][i];
      }
  }

  // Oriented boundary matrices.
  {
    std::vector<TripI> t;
    t.reserve(static_cast<std::size_t>(2 * cx.counts_[1]));
    for (Index e = 0; e < cx.counts_[1]; ++e) {
      t.emplace_back(cx.edge_vertices[static_cast<std::size_t>(e)][0], e, -1);
      t.emplace_back(cx.edge_vertices[static_cast<std::size_t>(e)][1], e, 1);
    }
    cx.B1.resize(cx.counts_[0], cx.counts_[1]);
    cx.B1.setFromTriplets(t.begin(), t.end());
  }
  cx.edge_quads.assign(static_cast<std::size_t>(cx.counts_[1]), {});
  {
    std::vector<TripI> t;
    t.reserve(static_cast<std::size_t>(4 * cx.counts_[2]));
    for (Index q = 0; q < cx.counts_[2]; ++q) {
      const std::array<Index, 4> oc = oriented_cycle(cx.quad_cycle[static_cast<std::size_t>(q)]);
      for (int i = 0; i < 4; ++i) {
        const Index u = oc[static_cast<std::size_t>(i)];
        const Index w = oc[static_cast<std::size_t>((i + 1) % 4)];
        const Index e = edge_ids.at({std::min(u, w), std::max(u, w)});
        t.emplace_back(e, q, u < w ? 1 : -1);
        cx.edge_quads[static_cast<std::size_t>(e)].push_back(q);
      }
    }
    cx.B2.resize(cx.counts_[1], cx.counts_[2]);
    cx.B2.setFromTriplets(t.begin(), t.end());
  }
  cx.quad_hexes.assign(static_cast<std::size_t>(cx.counts_[2]), {});
  {
    std::vector<TripI> t;
    t.reserve(static_cast<std::size_t>(6 * cx.counts_[3]));
    for (Index h = 0; h < cx.counts_[3]; ++h) {
      const auto& corn = cx.hex_corners[static_cast<std::size_t>(h)];
      for (int d = 0; d < 3; ++d)
        for (int s = 0; s < 2; ++s) {
          const int a = (d + 1) % 3, b = (d + 2) % 3;
          int delta[3] = {0, 0, 0};
          delta[d] = s;
          const auto at = [&](int da, int db) {
            int dd[3] = {delta[0], delta[1], delta[2]};
            dd[a] = da;
            dd[b] = db;
            return corn[static_cast<std::size_t>(dd[0] + 2 * dd[1] + 4 * dd[2])];
          };
          // Lattice cycle with right-hand normal +e_d.
          const std::array<Index, 4> cyc{at(0, 0), at(1, 0), at(1, 1), at(0, 1)};
          std::array<Index, 4> key = cyc;
          std::sort(key.begin(), key.end());
          const Index q = quad_ids.at(key);
          const int rel = cycle_rule_sign(cyc);
          t.emplace_back(q, h, rel * (s == 1 ? 1 : -1));
          cx.quad_hexes[static_cast<std::size_t>(q)].push_back(h);
        }
    }
    cx.B3.resize(cx.counts_[2], cx.counts_[3]);
    cx.B3.setFromTriplets(t.begin(), t.end());
  }

  // Glued spline incidence matrices, rows emitted by the owner patch.
  {
    std::vector<char> row_done_e(static_cast<std::size_t>(cx.counts_[1]), 0);
    std::vector<char> row_done_q(static_cast<std::size_t>(cx.counts_[2]), 0);
    std::vector<TripI> tg, tc, td;
    for (Index p = 0; p < np; ++p) {
      const auto& m = local[static_cast<std::size_t>(p)];
      const auto& n = m.vertex_grid.dims;
      const PatchDofMap& dm = cx.patch_dofs[static_cast<std::size_t>(p)];
      const TensorGrid vg = m.vertex_grid;
      const auto vglob = [&](int i, int j, int k) {
        return dm.cell[0][static_cast<std::size_t>(vg.flat(i, j, k))];
      };
      // Restriction sign of a local 1-DoF relative to the glued DoF.
      const auto r1 = [&](Index local_e) {
        return static_cast<int>(dm.sign[1][static_cast<std::size_t>(local_e)]) *
               static_cast<int>(
                   cx.iso_sign[1][static_cast<std::size_t>(dm.cell[1][static_cast<std::size_t>(local_e)])]);
      };
      const auto r2 = [&](Index local_q) {
        return static_cast<int>(dm.sign[2][static_cast<std::size_t>(local_q)]) *
               static_cast<int>(
                   cx.iso_sign[2][static_cast<std::size_t>(dm.cell[2][static_cast<std::size_t>(local_q)])]);
      };

      // Local edge indexing identical to the S^1 DoF layout.
      std::array<TensorGrid, 3> egrid;
      std::array<Index, 3> eoff{0, 0, 0};
      {
        Index off = 0;
        for (int d = 0; d < 3; ++d) {
          egrid[static_cast<std::size_t>(d)].dims = n;
          egrid[static_cast<std::size_t>(d)].dims[static_cast<std::size_t>(d)] -= 1;
          eoff[static_cast<std::size_t>(d)] = off;
          off += egrid[static_cast<std::size_t>(d)].size();
        }
      }
      const auto eloc = [&](int d, int i, int j, int k) {
        return eoff[static_cast<std::size_t>(d)] + egrid[static_cast<std::size_t>(d)].flat(i, j, k);
      };
      std::array<TensorGrid, 3> qgrid;
      std::array<Index, 3> qoff{0, 0, 0};
      {
        Index off = 0;
        for (int d = 0; d < 3; ++d) {
          const int a = (d + 1) % 3, b = (d + 2) % 3;
          qgrid[static_cast<std::size_t>(d)].dims = n;
          qgrid[static_cast<std::size_t>(d)].dims[static_cast<std::size_t>(a)] -= 1;
          qgrid[static_cast<std::size_t>(d)].dims[static_cast<std::size_t>(b)] -= 1;
          qoff[static_cast<std::size_t>(d)] = off;
          off += qgrid[static_cast<std::size_t>(d)].size();
        }
      }
      const auto qloc = [&](int d, int i, int j, int k) {
        return qoff[static_cast<std::size_t>(d)] + qgrid[static_cast<std::size_t>(d)].flat(i, j, k);
      };

      // Gradient rows (one per owned edge): difference of the two vertices
      // along the owner lattice direction.
      for (int d = 0; d < 3; ++d)
        for (int k = 0; k < egrid[static_cast<std::size_t>(d)].dims[2]; ++k)
          for (int j = 0; j < egrid[static_cast<std::size_t>(d)].dims[1]; ++j)
            for (int i = 0; i < egrid[static_cast<std::size_t>(d)].dims[0]; ++i) {
              const Index le = eloc(d, i, j, k);
              const Index ge = dm.cell[1][static_cast<std::size_t>(le)];
              if (row_done_e[static_cast<std::size_t>(ge)]) continue;
              row_done_e[static_cast<std::size_t>(ge)] = 1;
              int hi[3] = {i, j, k};
              hi[d] += 1;
              tg.emplace_back(ge, vglob(i, j, k), -1);
              tg.emplace_back(ge, vglob(hi[0], hi[1], hi[2]), 1);
            }

      // Curl rows (one per owned quad).
      for (int d = 0; d < 3; ++d) {
        const int a = (d + 1) % 3, b = (d + 2) % 3;
        for (int k = 0; k < qgrid[static_cast<std::size_t>(d)].dims[2]; ++k)
          for (int j = 0; j < qgrid[static_cast<std::size_t>(d)].dims[1]; ++j)
            for (int i = 0; i < qgrid[static_cast<std::size_t>(d)].dims[0]; ++i) {
              const Index lq = qloc(d, i, j, k);
              const Index gq = dm.cell[2][static_cast<std::size_t>(lq)];
              if (row_done_q[static_cast<std::size_t>(gq)]) continue;
              row_done_q[static_cast<std::size_t>(gq)] = 1;
              const int base[3] = {i, j, k};
              const auto add = [&](int comp, const int at[3], int val) {
                const Index le = eloc(comp, at[0], at[1], at[2]);
                tc.emplace_back(gq, dm.cell[1][static_cast<std::size_t>(le)],
                                val * r1(le));
              };
              int pos[3] = {base[0], base[1], base[2]};
              add(b, pos, -1);
              pos[a] += 1;
              add(b, pos, 1);
              pos[a] -= 1;
              add(a, pos, 1);
              pos[b] += 1;
              add(a, pos, -1);
            }
      }

      // Divergence rows (hexes are never shared).
      {
        TensorGrid hg;
        hg.dims = {n[0] - 1, n[1] - 1, n[2] - 1};
        for (int k = 0; k < hg.dims[2]; ++k)
          for (int j = 0; j < hg.dims[1]; ++j)
            for (int i = 0; i < hg.dims[0]; ++i) {
              const Index gh = dm.cell[3][static_cast<std::size_t>(hg.flat(i, j, k))];
              for (int d = 0; d < 3; ++d) {
                int lo[3] = {i, j, k}, hi[3] = {i, j, k};
                hi[d] += 1;
                const Index lq_lo = qloc(d, lo[0], lo[1], lo[2]);
                const Index lq_hi = qloc(d, hi[0], hi[1], hi[2]);
                td.emplace_back(gh, dm.cell[2][static_cast<std::size_t>(lq_lo)],
                                -r2(lq_lo));
                td.emplace_back(gh, dm.cell[2][static_cast<std::size_t>(lq_hi)],
                                r2(lq_hi));
              }
            }
      }
    }
    cx.G.resize(cx.counts_[1], cx.counts_[0]);
    cx.G.setFromTriplets(tg.begin(), tg.end());
    cx.C.resize(cx.counts_[2], cx.counts_[1]);
    cx.C.setFromTriplets(tc.begin(), tc.end());
    cx.D.resize(cx.counts_[3], cx.counts_[2]);
    cx.D.setFromTriplets(td.begin(), td.end());
  }

  // Vertex adjacency, sorted by neighbor id for deterministic traversals.
  cx.vertex_nbrs.assign(static_cast<std::size_t>(cx.counts_[0]), {});
  for (Index e = 0; e < cx.counts_[1]; ++e) {
    const auto [a, b] = cx.edge_vertices[static_cast<std::size_t>(e)];
    cx.vertex_nbrs[static_cast<std::size_t>(a)].emplace_back(b, e);
    cx.vertex_nbrs[static_cast<std::size_t>(b)].emplace_back(a, e);
  }
  for (auto& nb : cx.vertex_nbrs) std::sort(nb.begin(), nb.end());

  // Sanity of the manifold structure: every quad bounds one or two hexes.
  for (Index q = 0; q < cx.counts_[2]; ++q) {
    const std::size_t nh = cx.quad_hexes[static_cast<std::size_t>(q)].size();
    if (nh < 1 || nh > 2)
      throw TopologyError("quad " + std::to_string(q) + " bounds " +
                          std::to_string(nh) + " hexes");
  }

  // Domain boundary: quads with a single hex, plus their edges and vertices.
  for (int k = 0; k < 4; ++k)
    cx.on_boundary[static_cast<std::size_t>(k)].assign(
        static_cast<std::size_t>(cx.counts_[static_cast<std::size_t>(k)]), 0);
  for (Index q = 0; q < cx.counts_[2]; ++q) {
    if (cx.quad_hexes[static_cast<std::size_t>(q)].size() != 1) continue;
    cx.on_boundary[2][static_cast<std::size_t>(q)] = 1;
    for (const Index v : cx.quad_cycle[static_cast<std::size_t>(q)])
      cx.on_boundary[0][static_cast<std::size_t>(v)] = 1;
    for (SpMatI::InnerIterator it(cx.B2, q); it; ++it)
      cx.on_boundary[1][static_cast<std::size_t>(it.row())] = 1;
  }

  std::vector<Subdomain> labels(static_cast<std::size_t>(np));
  for (Index p = 0; p < np; ++p)
    labels[static_cast<std::size_t>(p)] = geom.patches[static_cast<std::size_t>(p)].subdomain();
  cx.set_labels(labels);
  return cx;
}

void CubicalComplex::set_labels(const std::vector<Subdomain>& per_patch) {
  hex_label.resize(static_cast<std::size_t>(counts_[3]));
  for (Index h = 0; h < counts_[3]; ++h)
    hex_label[static_cast<std::size_t>(h)] =
        per_patch[static_cast<std::size_t>(owner_patch_of_hex[static_cast<std::size_t>(h)])];
  for (int k = 0; k < 4; ++k) {
    touches_conductor[static_cast<std::size_t>(k)].assign(
        static_cast<std::size_t>(counts_[static_cast<std::size_t>(k)]), 0);
    touches_insulator[static_cast<std::size_t>(k)].assign(
        static_cast<std::size_t>(counts_[static_cast<std::size_t>(k)]), 0);
  }
  for (Index h = 0; h < counts_[3]; ++h) {
    auto& tc = (hex_label[static_cast<std::size_t>(h)] == Subdomain::conductor)
                   ? touches_conductor
                   : touches_insulator;
    tc[3][static_cast<std::size_t>(h)] = 1;
    for (SpMatI::InnerIterator qit(B3, h); qit; ++qit) {
      const Index q = qit.row();
      tc[2][static_cast<std::size_t>(q)] = 1;
      for (SpMatI::InnerIterator eit(B2, q); eit; ++eit) {
        const Index e = eit.row();
        tc[1][static_cast<std::size_t>(e)] = 1;
        tc[0][static_cast<std::size_t>(edge_vertices[static_cast<std::size_t>(e)][0])] = 1;
        tc[0][static_cast<std::size_t>(edge_vertices[static_cast<std::size_t>(e)][1])] = 1;
      }
    }
  }
}

Index CubicalComplex::find_edge(Index a, Index b) const {
  for (const auto& [nbr, e] : vertex_nbrs[static_cast<std::size_t>(a)])
    if (nbr == b) return e;
  throw ArgumentError("no edge between vertices " + std::to_string(a) + " and " +
                      std::to_string(b));
}

namespace {

/// Extracts the (rows x cols) submatrix of m at the given index lists.
SpMatI restrict_matrix(const SpMatI& m, const std::vector<Index>& rows,
                       const std::vector<Index>& cols) {
  std::vector<Index> rmap(static_cast<std::size_t>(m.rows()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    rmap[static_cast<std::size_t>(rows[i])] = static_cast<Index>(i);
  std::vector<TripI> t;
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (SpMatI::InnerIterator it(m, cols[j]); it; ++it)
      if (rmap[static_cast<std::size_t>(it.row())] >= 0)
        t.emplace_back(rmap[static_cast<std::size_t>(it.row())], static_cast<Index>(j),
                       it.value());
  SpMatI out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

bool sparse_equal(const SpMatI& a, const SpMatI& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  SpMatI d = a - b;
  d.prune([](Index, Index, Index v) { return v != 0; });
  return d.nonZeros() == 0;
}

/// Signed patch restriction of B_k^T: row r runs over the patch's local
/// k-cells (= column of B_k at the global id), columns over local (k-1)-cells,
/// with the sigma orientation signs applied on both sides.
SpMatI signed_restriction(const SpMatI& b, const PatchDofMap& dm, int krow,
                          int kcol) {
  std::vector<TripI> t;
  std::vector<Index> col_of_global(static_cast<std::size_t>(b.rows()), -1);
  for (std::size_t i = 0; i < dm.cell[static_cast<std::size_t>(kcol)].size(); ++i)
    col_of_global[static_cast<std::size_t>(dm.cell[static_cast<std::size_t>(kcol)][i])] =
        static_cast<Index>(i);
  for (std::size_t r = 0; r < dm.cell[static_cast<std::size_t>(krow)].size(); ++r) {
    const Index grow = dm.cell[static_cast<std::size_t>(krow)][r];
    const int srow = dm.sign[static_cast<std::size_t>(krow)][r];
    for (SpMatI::InnerIterator it(b, grow); it; ++it) {
      const Index lc = col_of_global[static_cast<std::size_t>(it.row())];
      if (lc >= 0) {
        const int scol =
            dm.sign[static_cast<std::size_t>(kcol)][static_cast<std::size_t>(lc)];
        t.emplace_back(static_cast<Index>(r), lc, srow * it.value() * scol);
      }
    }
  }
  SpMatI out(static_cast<Index>(dm.cell[static_cast<std::size_t>(krow)].size()),
             static_cast<Index>(dm.cell[static_cast<std::size_t>(kcol)].size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace

void verify_patchwise_incidence(const CubicalComplex& cx,
                                const MultipatchGeometry& geom) {
  for (std::size_t p = 0; p < geom.patches.size(); ++p) {
    const PatchIncidence inc = patch_incidence(geom.patches[p].knot_vectors());
    const PatchDofMap& dm = cx.patch_dofs[p];
    const SpMatI rg = signed_restriction(cx.B1, dm, 1, 0);
    const SpMatI rc = signed_restriction(cx.B2, dm, 2, 1);
    const SpMatI rd = signed_restriction(cx.B3, dm, 3, 2);
    if (!sparse_equal(rg, inc.G))
      throw Error("patch '" + geom.patches[p].name() +
                  "': B1^T restriction differs from G");
    if (!sparse_equal(rc, inc.C))
      throw Error("patch '" + geom.patches[p].name() +
                  "': B2^T restriction differs from C");
    if (!sparse_equal(rd, inc.D))
      throw Error("patch '" + geom.patches[p].name() +
                  "': B3^T restriction differs from D");
  }
}

InterfaceComplex extract_interface(const CubicalComplex& cx) {
  InterfaceComplex ic;
  bool has_c = false, has_i = false;
  for (const Subdomain s : cx.hex_label) {
    has_c |= (s == Subdomain::conductor);
    has_i |= (s == Subdomain::insulator);
  }
  if (!has_c || !has_i)
    throw TopologyError("interface extraction needs both subdomains nonempty");

  std::vector<char> on_surf_e(static_cast<std::size_t>(cx.num_cells(1)), 0);
  std::vector<char> on_surf_v(static_cast<std::size_t>(cx.num_cells(0)), 0);
  for (Index q = 0; q < cx.num_cells(2); ++q) {
    if (!cx.is_interface_quad(q)) continue;
    ic.quads.push_back(q);
    for (SpMatI::InnerIterator it(cx.B2, q); it; ++it)
      on_surf_e[static_cast<std::size_t>(it.row())] = 1;
  }
  for (Index e = 0; e < cx.num_cells(1); ++e)
    if (on_surf_e[static_cast<std::size_t>(e)]) {
      ic.edges.push_back(e);
      on_surf_v[static_cast<std::size_t>(cx.edge_vertices[static_cast<std::size_t>(e)][0])] = 1;
      on_surf_v[static_cast<std::size_t>(cx.edge_vertices[static_cast<std::size_t>(e)][1])] = 1;
    }
  for (Index v = 0; v < cx.num_cells(0); ++v)
    if (on_surf_v[static_cast<std::size_t>(v)]) ic.vertices.push_back(v);

  ic.vertex_local.assign(static_cast<std::size_t>(cx.num_cells(0)), -1);
  ic.edge_local.assign(static_cast<std::size_t>(cx.num_cells(1)), -1);
  for (std::size_t i = 0; i < ic.vertices.size(); ++i)
    ic.vertex_local[static_cast<std::size_t>(ic.vertices[i])] = static_cast<Index>(i);
  for (std::size_t i = 0; i < ic.edges.size(); ++i)
    ic.edge_local[static_cast<std::size_t>(ic.edges[i])] = static_cast<Index>(i);

  ic.B1s = restrict_matrix(cx.B1, ic.vertices, ic.edges);
  ic.B2s = restrict_matrix(cx.B2, ic.edges, ic.quads);

  // Closed-surface check: every surface edge bounds exactly two surface quads.
  std::vector<int> edge_quad_count(ic.edges.size(), 0);
  for (Index q = 0; q < static_cast<Index>(ic.quads.size()); ++q)
    for (SpMatI::InnerIterator it(ic.B2s, q); it; ++it)
      edge_quad_count[static_cast<std::size_t>(it.row())]++;
  for (std::size_t i = 0; i < ic.edges.size(); ++i)
    if (edge_quad_count[i] != 2)
      throw TopologyError("non-manifold interface: edge " +
                          std::to_string(ic.edges[i]) + " bounds " +
                          std::to_string(edge_quad_count[i]) + " interface quads");

  // Connected components over quad-edge adjacency.
  const Index nq = static_cast<Index>(ic.quads.size());
  UnionFind quf(nq);
  {
    std::vector<Index> first_quad(ic.edges.size(), -1);
    for (Index q = 0; q < nq; ++q)
      for (SpMatI::InnerIterator it(ic.B2s, q); it; ++it) {
        Index& f = first_quad[static_cast<std::size_t>(it.row())];
        if (f < 0)
          f = q;
        else
          quf.unite(f, q);
      }
  }
  std::vector<Index> comp_root;
  ic.quad_component.assign(static_cast<std::size_t>(nq), -1);
  for (Index q = 0; q < nq; ++q) {
    const Index r = quf.find(q);
    int c = -1;
    for (std::size_t i = 0; i < comp_root.size(); ++i)
      if (comp_root[i] == r) c = static_cast<int>(i);
    if (c < 0) {
      c = static_cast<int>(comp_root.size());
      comp_root.push_back(r);
    }
    ic.quad_component[static_cast<std::size_t>(q)] = c;
  }
  ic.num_components = static_cast<int>(comp_root.size());

  // Euler characteristic per component (vertices and edges attributed via
  // any incident quad; consistent because components are edge-connected).
  std::vector<int> vcomp(ic.vertices.size(), -1), ecomp(ic.edges.size(), -1);
  for (Index q = 0; q < nq; ++q)
    for (SpMatI::InnerIterator it(ic.B2s, q); it; ++it) {
      ecomp[static_cast<std::size_t>(it.row())] =
          ic.quad_component[static_cast<std::size_t>(q)];
      const auto ev = cx.edge_vertices[static_cast<std::size_t>(
          ic.edges[static_cast<std::size_t>(it.row())])];
      vcomp[static_cast<std::size_t>(ic.vertex_local[static_cast<std::size_t>(ev[0])])] =
          ic.quad_component[static_cast<std::size_t>(q)];
      vcomp[static_cast<std::size_t>(ic.vertex_local[static_cast<std::size_t>(ev[1])])] =
          ic.quad_component[static_cast<std::size_t>(q)];
    }
  ic.component_euler.assign(static_cast<std::size_t>(ic.num_components), 0);
  for (int c : vcomp) ic.component_euler[static_cast<std::size_t>(c)] += 1;
  for (int c : ecomp) ic.component_euler[static_cast<std::size_t>(c)] -= 1;
  for (int c : ic.quad_component) ic.component_euler[static_cast<std::size_t>(c)] += 1;
  return ic;
}

void dump_triplets(const SpMatI& m, std::ostream& os) {
  std::vector<std::array<Index, 3>> rows;
  rows.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (Index c = 0; c < m.outerSize(); ++c)
    for (SpMatI::InnerIterator it(m, c); it; ++it)
      rows.push_back({static_cast<Index>(it.row()) + 1, c + 1, it.value()});
  std::sort(rows.begin(), rows.end());
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d %d %d\n", r[0], r[1], r[2]);
    os << buf;
  }
}

void dump_control_mesh(const CubicalComplex& cx, std::ostream& os) {
  char buf[128];
  os << "vertices " << cx.num_cells(0) << "\n";
  for (const Vec3& x : cx.vertex_xyz) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", x[0], x[1], x[2]);
    os << buf;
  }
  os << "edges " << cx.num_cells(1) << "\n";
  for (const auto& e : cx.edge_vertices) os << e[0] + 1 << " " << e[1] + 1 << "\n";
  os << "quads " << cx.num_cells(2) << "\n";
  for (const auto& q : cx.quad_cycle)
    os << q[0] + 1 << " " << q[1] + 1 << " " << q[2] + 1 << " " << q[3] + 1 << "\n";
  os << "hexes " << cx.num_cells(3) << "\n";
  for (const auto& h : cx.hex_corners) {
    for (int i = 0; i < 8; ++i) os << h[static_cast<std::size_t>(i)] + 1 << (i == 7 ? "\n" : " ");
  }
}

}  // namespace igacoh
