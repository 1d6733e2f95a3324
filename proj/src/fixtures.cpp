// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#include "igacoh/fixtures.hpp"

#include <cmath>

namespace igacoh {
namespace fixtures {

namespace {

std::array<KnotVector, 3> uniform_kvs(int degree, int elems) {
  return {KnotVector::uniform(degree, elems), KnotVector::uniform(degree, elems),
          KnotVector::uniform(degree, elems)};
}

}  // namespace

Patch box_patch(const std::string& name, const Vec3& lo, const Vec3& hi, int degree,
                int elems, Subdomain sub) {
  auto kvs = uniform_kvs(degree, elems);
  std::array<std::vector<double>, 3> g;
  for (int d = 0; d < 3; ++d) g[static_cast<std::size_t>(d)] = greville_points(kvs[static_cast<std::size_t>(d)]);
  std::vector<Vec3> pts;
  pts.reserve(g[0].size() * g[1].size() * g[2].size());
  for (double gz : g[2])
    for (double gy : g[1])
      for (double gx : g[0])
        pts.emplace_back(lo[0] + (hi[0] - lo[0]) * gx, lo[1] + (hi[1] - lo[1]) * gy,
                         lo[2] + (hi[2] - lo[2]) * gz);
  return Patch(name, std::move(kvs), std::move(pts), {}, sub);
}

Patch identity_patch(int degree, int elems, Subdomain sub) {
  return box_patch("cube", Vec3::Zero(), Vec3::Ones(), degree, elems, sub);
}

Patch curved_patch(int degree, int elems) {
  auto kvs = uniform_kvs(degree, elems);
  std::array<std::vector<double>, 3> g;
  for (int d = 0; d < 3; ++d) g[static_cast<std::size_t>(d)] = greville_points(kvs[static_cast<std::size_t>(d)]);
  std::vector<Vec3> pts;
  const double amp = 0.12;
  for (double gz : g[2])
    for (double gy : g[1])
      for (double gx : g[0]) {
        // smooth interior bulge, zero at the corners
        const double sx = std::sin(M_PI * gx), sy = std::sin(M_PI * gy),
                     sz = std::sin(M_PI * gz);
        pts.emplace_back(gx + amp * sy * sz, gy + amp * 0.7 * sz * sx,
                         gz + amp * 0.5 * sx * sy);
      }
  return Patch("curved", std::move(kvs), std::move(pts), {}, Subdomain::insulator);
}

Patch quarter_annulus_patch(const std::string& name, double r_in, double r_out,
                            double z0, double z1, int quarter, Subdomain sub) {
  const std::array<KnotVector, 3> kvs = uniform_kvs(2, 1);
  // radial and vertical control abscissae at the quadratic Greville points
  const double rs[3] = {r_in, 0.5 * (r_in + r_out), r_out};
  const double zs[3] = {z0, 0.5 * (z0 + z1), z1};
  // quarter circle in the first quadrant: (r,0) -> (r,r)/w -> (0,r)
  const double w_mid = std::sqrt(0.5);
  std::vector<Vec3> pts;
  std::vector<double> wts;
  for (int iz = 0; iz < 3; ++iz)
    for (int ith = 0; ith < 3; ++ith)
      for (int ir = 0; ir < 3; ++ir) {
        double x = 0.0, y = 0.0;
        const double r = rs[ir];
        if (ith == 0) {
          x = r;
          y = 0.0;
        } else if (ith == 1) {
          x = r;
          y = r;
        } else {
          x = 0.0;
          y = r;
        }
        // exact 90-degree rotations
        for (int rot = 0; rot < quarter % 4; ++rot) {
          const double tmp = x;
          x = -y;
          y = tmp;
        }
        pts.emplace_back(x, y, zs[iz]);
        wts.push_back(ith == 1 ? w_mid : 1.0);
      }
  Patch p(name, kvs, std::move(pts), std::move(wts), sub);
  return p;
}

MultipatchGeometry single_cube(int degree, int elems) {
  MultipatchGeometry g;
  g.patches.push_back(identity_patch(degree, elems));
  return g;
}

MultipatchGeometry two_patch_cube(int degree, int elems) {
  MultipatchGeometry g;
  g.patches.push_back(box_patch("left", Vec3(0, 0, 0), Vec3(1, 1, 1), degree, elems,
                                Subdomain::conductor));
  g.patches.push_back(box_patch("right", Vec3(1, 0, 0), Vec3(2, 1, 1), degree, elems,
                                Subdomain::insulator));
  return g;
}

namespace {

/// Trilinear patch from its 8 prism corners, sampled at the Greville lattice
/// (tensor-product linear precision keeps the map exact at any degree).
Patch trilinear_patch(const std::string& name, const std::array<Vec3, 8>& corner,
                      int degree, int elems, Subdomain sub) {
  auto kvs = uniform_kvs(degree, elems);
  std::array<std::vector<double>, 3> g;
  for (int d = 0; d < 3; ++d) g[static_cast<std::size_t>(d)] = greville_points(kvs[static_cast<std::size_t>(d)]);
  std::vector<Vec3> pts;
  for (double gz : g[2])
    for (double gy : g[1])
      for (double gx : g[0]) {
        Vec3 x = Vec3::Zero();
        for (int dz = 0; dz < 2; ++dz)
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx)
              x += corner[static_cast<std::size_t>(dx + 2 * dy + 4 * dz)] *
                   (dx ? gx : 1 - gx) * (dy ? gy : 1 - gy) * (dz ? gz : 1 - gz);
        pts.push_back(x);
      }
  return Patch(name, std::move(kvs), std::move(pts), {}, sub);
}

std::array<Vec3, 8> prism(const Vec3& c00, const Vec3& c10, const Vec3& c01,
                          const Vec3& c11, double z0, double z1) {
  const auto at = [&](const Vec3& c, double z) { return Vec3(c[0], c[1], z); };
  return {at(c00, z0), at(c10, z0), at(c01, z0), at(c11, z0),
          at(c00, z1), at(c10, z1), at(c01, z1), at(c11, z1)};
}

}  // namespace

MultipatchGeometry four_box_ring(int degree, int elems) {
  // Picture frame mitered at the corners: four trapezoid patches around the
  // hole [1,2]^2, conforming across the diagonal interfaces.
  MultipatchGeometry g;
  const double z0 = 0.0, z1 = 1.0;
  g.patches.push_back(trilinear_patch(
      "south", prism(Vec3(0, 0, 0), Vec3(3, 0, 0), Vec3(1, 1, 0), Vec3(2, 1, 0), z0, z1),
      degree, elems, Subdomain::conductor));
  g.patches.push_back(trilinear_patch(
      "east", prism(Vec3(3, 0, 0), Vec3(3, 3, 0), Vec3(2, 1, 0), Vec3(2, 2, 0), z0, z1),
      degree, elems, Subdomain::conductor));
  g.patches.push_back(trilinear_patch(
      "north", prism(Vec3(3, 3, 0), Vec3(0, 3, 0), Vec3(2, 2, 0), Vec3(1, 2, 0), z0, z1),
      degree, elems, Subdomain::conductor));
  g.patches.push_back(trilinear_patch(
      "west", prism(Vec3(0, 3, 0), Vec3(0, 0, 0), Vec3(1, 2, 0), Vec3(1, 1, 0), z0, z1),
      degree, elems, Subdomain::conductor));
  return g;
}

MultipatchGeometry square_washer(int degree, int elems) {
  MultipatchGeometry g;
  const double s = 0.01;  // meters
  const double xc[6] = {-8 * s, -2 * s, -1 * s, 1 * s, 2 * s, 8 * s};
  const double zc[4] = {-8 * s, -0.5 * s, 0.5 * s, 8 * s};
  for (int kz = 0; kz < 3; ++kz)
    for (int jy = 0; jy < 5; ++jy)
      for (int ix = 0; ix < 5; ++ix) {
        const bool ring = (kz == 1) && std::max(std::abs(ix - 2), std::abs(jy - 2)) == 1;
        const std::string name = "p" + std::to_string(ix) + std::to_string(jy) +
                                 std::to_string(kz) + (ring ? "_c" : "");
        g.patches.push_back(box_patch(
            name, Vec3(xc[ix], xc[jy], zc[kz]), Vec3(xc[ix + 1], xc[jy + 1], zc[kz + 1]),
            degree, elems, ring ? Subdomain::conductor : Subdomain::insulator));
      }
  return g;
}

MultipatchGeometry annulus_washer(int elems) {
  MultipatchGeometry g;
  for (int q = 0; q < 4; ++q) {
    Patch p = quarter_annulus_patch("quarter" + std::to_string(q), 0.01, 0.02,
                                    -0.005, 0.005, q, Subdomain::conductor);
    for (int r = 1; r < elems; r *= 2) p = p.refined_uniform();
    g.patches.push_back(std::move(p));
  }
  return g;
}

namespace {

using HomPoint = Eigen::Vector3d;  // (w*x, w*y, w)

/// Degree-p homogeneous control row of the 90-degree arc of radius r spanning
/// sector k (angles -45+90k .. 45+90k degrees), exact by Bezier elevation of
/// the quadratic rational arc.
std::vector<HomPoint> arc_hom(double r, int sector, int p) {
  const double w = std::sqrt(0.5);
  std::vector<HomPoint> row{HomPoint(r * w, -r * w, 1.0),
                            HomPoint(w * (r * std::sqrt(2.0)), 0.0, w),
                            HomPoint(r * w, r * w, 1.0)};
  for (int t = 2; t < p; ++t) {
    std::vector<HomPoint> up(static_cast<std::size_t>(t) + 2);
    up.front() = row.front();
    up.back() = row.back();
    for (int i = 1; i <= t; ++i)
      up[static_cast<std::size_t>(i)] =
          (static_cast<double>(i) / (t + 1)) * row[static_cast<std::size_t>(i - 1)] +
          (1.0 - static_cast<double>(i) / (t + 1)) * row[static_cast<std::size_t>(i)];
    row = std::move(up);
  }
  for (int k = 0; k < sector % 4; ++k)
    for (HomPoint& h : row) {
      const double x = h[0];
      h[0] = -h[1];
      h[1] = x;
    }
  return row;
}

/// Straight segment a -> b as a degree-p row (Greville sampling, unit weights).
std::vector<HomPoint> segment_hom(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                  int p) {
  const auto g = greville_points(KnotVector::uniform(p, 1));
  std::vector<HomPoint> row;
  row.reserve(g.size());
  for (double t : g) {
    const Eigen::Vector2d x = (1.0 - t) * a + t * b;
    row.emplace_back(x[0], x[1], 1.0);
  }
  return row;
}

/// Prism patch blending two planar homogeneous rows radially (direction 1),
/// angular direction 2, z direction 3. Single element per direction.
Patch planar_blend_patch(const std::string& name, const std::vector<HomPoint>& inner,
                         const std::vector<HomPoint>& outer, int p, double z0,
                         double z1, Subdomain sub) {
  const KnotVector kv = KnotVector::uniform(p, 1);
  const auto g = greville_points(kv);
  const int n = static_cast<int>(g.size());
  std::vector<Vec3> pts;
  std::vector<double> wts;
  pts.reserve(static_cast<std::size_t>(n * n * n));
  bool rational = false;
  for (int iz = 0; iz < n; ++iz)
    for (int ith = 0; ith < n; ++ith)
      for (int ir = 0; ir < n; ++ir) {
        const HomPoint h = (1.0 - g[static_cast<std::size_t>(ir)]) * inner[static_cast<std::size_t>(ith)] +
                           g[static_cast<std::size_t>(ir)] * outer[static_cast<std::size_t>(ith)];
        const double z = z0 + (z1 - z0) * g[static_cast<std::size_t>(iz)];
        pts.emplace_back(h[0] / h[2], h[1] / h[2], z);
        wts.push_back(h[2]);
        rational |= (std::abs(h[2] - 1.0) > 1e-15);
      }
  if (!rational) wts.clear();
  return Patch(name, {kv, kv, kv}, std::move(pts), std::move(wts), sub);
}

}  // namespace

MultipatchGeometry cylinder_washer(int degree, int elems) {
  MultipatchGeometry g;
  const double cm = 0.01;
  const double d_core = 0.5 * cm;      // axis-aligned square core half-width
  const double r_in = 1.0 * cm;        // conductor inner radius
  const double r_out = 2.0 * cm;       // conductor outer radius
  const double r_far = 4.0 * cm;       // outer circular interface
  const double box = 8.0 * cm;         // box half-width
  const double zc[4] = {-8.0 * cm, -0.5 * cm, 0.5 * cm, 8.0 * cm};
  const int p = degree;

  for (int kz = 0; kz < 3; ++kz) {
    const double z0 = zc[kz], z1 = zc[kz + 1];
    const std::string suffix = "_z" + std::to_string(kz);
    // square core
    {
      Patch core = box_patch("core" + suffix, Vec3(-d_core, -d_core, z0),
                             Vec3(d_core, d_core, z1), p, 1, Subdomain::insulator);
      g.patches.push_back(std::move(core));
    }
    for (int s = 0; s < 4; ++s) {
      // core corners on the diagonal rays bound sector s
      Eigen::Vector2d a(d_core, -d_core), b(d_core, d_core);
      for (int k = 0; k < s; ++k) {
        a = Eigen::Vector2d(-a[1], a[0]);
        b = Eigen::Vector2d(-b[1], b[0]);
      }
      g.patches.push_back(planar_blend_patch(
          "trans" + std::to_string(s) + suffix, segment_hom(a, b, p),
          arc_hom(r_in, s, p), p, z0, z1, Subdomain::insulator));
      g.patches.push_back(planar_blend_patch(
          "ring" + std::to_string(s) + suffix, arc_hom(r_in, s, p),
          arc_hom(r_out, s, p), p, z0, z1,
          (kz == 1) ? Subdomain::conductor : Subdomain::insulator));
      g.patches.push_back(planar_blend_patch(
          "annulus" + std::to_string(s) + suffix, arc_hom(r_out, s, p),
          arc_hom(r_far, s, p), p, z0, z1, Subdomain::insulator));
      Eigen::Vector2d oa(box, -box), ob(box, box);
      for (int k = 0; k < s; ++k) {
        oa = Eigen::Vector2d(-oa[1], oa[0]);
        ob = Eigen::Vector2d(-ob[1], ob[0]);
      }
      g.patches.push_back(planar_blend_patch(
          "ogrid" + std::to_string(s) + suffix, arc_hom(r_far, s, p),
          segment_hom(oa, ob, p), p, z0, z1, Subdomain::insulator));
    }
  }
  for (Patch& patch : g.patches)
    for (int r = 1; r < elems; r *= 2) patch = patch.refined_uniform();
  return g;
}

MultipatchGeometry plate_with_holes(int degree, int elems) {
  // Plate of 17 x 3 cells (18 mm each) with 8 hole cells, inside a margin of
  // insulator; 19 x 5 x 3 patch grid.
  MultipatchGeometry g;
  const double c = 0.018;
  std::vector<double> xc{-2 * c};
  for (int i = 0; i <= 17; ++i) xc.push_back(i * c);
  xc.push_back(17 * c + 2 * c);
  const double yc[6] = {-2 * c, 0, c, 2 * c, 3 * c, 5 * c};
  const double zc[4] = {-2 * c, 0, 0.019, 0.019 + 2 * c};
  int hole = 0;
  for (int kz = 0; kz < 3; ++kz)
    for (int jy = 0; jy < 5; ++jy)
      for (int ix = 0; ix < 19; ++ix) {
        const bool in_plate = (kz == 1) && (ix >= 1 && ix <= 17) && (jy >= 1 && jy <= 3);
        const bool is_hole = in_plate && (jy == 2) && (ix % 2 == 0);
        std::string name;
        Subdomain sub = Subdomain::insulator;
        if (is_hole) {
          name = "hole" + std::to_string(++hole);
        } else if (in_plate) {
          name = "plate_" + std::to_string(ix) + "_" + std::to_string(jy);
          sub = Subdomain::conductor;
        } else {
          name = "air_" + std::to_string(ix) + "_" + std::to_string(jy) + "_" +
                 std::to_string(kz);
        }
        g.patches.push_back(box_patch(name,
                                      Vec3(xc[static_cast<std::size_t>(ix)], yc[jy], zc[kz]),
                                      Vec3(xc[static_cast<std::size_t>(ix + 1)], yc[jy + 1], zc[kz + 1]),
                                      degree, elems, sub));
      }
  return g;
}

std::vector<Subdomain> plate_labels(const MultipatchGeometry& plate, int n_holes) {
  if (n_holes < 0 || n_holes > 8)
    throw ArgumentError("plate supports 0..8 holes");
  std::vector<Subdomain> labels;
  labels.reserve(plate.patches.size());
  for (const Patch& p : plate.patches) {
    Subdomain s = p.subdomain();
    if (p.name().rfind("hole", 0) == 0) {
      const int k = std::stoi(p.name().substr(4));
      s = (k <= n_holes) ? Subdomain::insulator : Subdomain::conductor;
    }
    labels.push_back(s);
  }
  return labels;
}

MultipatchGeometry conductor_block(int degree, int elems) {
  // 3x3x3 grid of boxes with the center one conducting.
  MultipatchGeometry g;
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i)
        g.patches.push_back(box_patch(
            "b" + std::to_string(i) + std::to_string(j) + std::to_string(k),
            Vec3(i, j, k) * 0.01, Vec3(i + 1, j + 1, k + 1) * 0.01, degree, elems,
            (i == 1 && j == 1 && k == 1) ? Subdomain::conductor
                                         : Subdomain::insulator));
  return g;
}

}  // namespace fixtures
}  // namespace igacoh
