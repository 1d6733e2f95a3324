// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#include "igacoh/assembly.hpp"

#include <algorithm>

namespace igacoh {

IntegrationDomain IntegrationDomain::all(const MultipatchGeometry& g, double c) {
  IntegrationDomain d;
  d.active.assign(g.patches.size(), 1);
  d.coeff.assign(g.patches.size(), c);
  return d;
}

IntegrationDomain IntegrationDomain::subdomain(const MultipatchGeometry& g,
                                               Subdomain s, double c) {
  IntegrationDomain d;
  d.active.resize(g.patches.size());
  d.coeff.assign(g.patches.size(), c);
  for (std::size_t i = 0; i < g.patches.size(); ++i)
    d.active[i] = (g.patches[i].subdomain() == s) ? 1 : 0;
  return d;
}

namespace {

struct ElementDofs {
  // One active basis function of the element: global spline DoF id, the
  // restriction sign into the glued basis, component, and the univariate
  // offsets into the cached factor tables.
  struct Entry {
    Index global;
    double sign;
    int comp;
    int ia, ib, ic;
  };
  std::vector<Entry> list;
};

/// Local DoF layout of S_p^k on a patch (component-major lexicographic),
/// mirrored from the TensorSplineSpace construction.
struct LocalLayout {
  std::array<TensorGrid, 3> grid;
  std::array<Index, 3> offset;
  int ncomp;
  Index flat(int c, int i, int j, int k) const {
    return offset[static_cast<std::size_t>(c)] +
           grid[static_cast<std::size_t>(c)].flat(i, j, k);
  }
};

LocalLayout local_layout(const TensorSplineSpace& s) {
  LocalLayout l;
  l.ncomp = s.num_components();
  for (int c = 0; c < l.ncomp; ++c) {
    l.grid[static_cast<std::size_t>(c)] = s.component_grid(c);
    l.offset[static_cast<std::size_t>(c)] = s.component_offset(c);
  }
  return l;
}

ElementDofs element_dofs(const TensorSplineSpace& space, const LocalLayout& lay,
                         const PatchDofMap& dm, int k,
                         const std::array<const DirectionQuadrature::Span*, 3>& sp,
                         const CubicalComplex& cx) {
  ElementDofs out;
  const int p = space.degree();
  for (int c = 0; c < space.num_components(); ++c) {
    int first[3], count[3];
    for (int d = 0; d < 3; ++d) {
      if (space.is_reduced(c, d)) {
        first[d] = sp[static_cast<std::size_t>(d)]->first_d;
        count[d] = p;
      } else {
        first[d] = sp[static_cast<std::size_t>(d)]->first_b;
        count[d] = p + 1;
      }
    }
    for (int kc = 0; kc < count[2]; ++kc)
      for (int jc = 0; jc < count[1]; ++jc)
        for (int ic = 0; ic < count[0]; ++ic) {
          const Index local =
              lay.flat(c, first[0] + ic, first[1] + jc, first[2] + kc);
          const Index cell = dm.cell[static_cast<std::size_t>(k)][static_cast<std::size_t>(local)];
          const double r =
              static_cast<double>(dm.sign[static_cast<std::size_t>(k)][static_cast<std::size_t>(local)]) *
              static_cast<double>(cx.iso_sign[static_cast<std::size_t>(k)][static_cast<std::size_t>(cell)]);
          out.list.push_back({cell, r, c, ic, jc, kc});
        }
  }
  return out;
}

double factor_value(const TensorSplineSpace& space, int comp, int dir,
                    const DirectionQuadrature::Span& sp, int q, int offset) {
  const int p = space.degree();
  if (space.is_reduced(comp, dir))
    return sp.dval[static_cast<std::size_t>(q * p + offset)];
  return sp.bval[static_cast<std::size_t>(q * (p + 1) + offset)];
}

double factor_deriv_b(const DirectionQuadrature::Span& sp, int q, int offset, int p) {
  return sp.bder[static_cast<std::size_t>(q * (p + 1) + offset)];
}

template <typename EmitLocal>
void for_each_element(const MultipatchGeometry& geom, const CubicalComplex& cx,
                      int form_degree, const IntegrationDomain& dom,
                      int quad_points, const EmitLocal& emit) {
  for (std::size_t pi = 0; pi < geom.patches.size(); ++pi) {
    if (!dom.active[pi]) continue;
    const Patch& patch = geom.patches[pi];
    const int p = patch.degree();
    const int nq = quad_points > 0 ? quad_points : p + 1;
    const TensorSplineSpace space(patch.knot_vectors(), form_degree);
    const LocalLayout lay = local_layout(space);
    const PatchQuadrature pq(patch, nq);
    const auto& dq = pq.directions();
    for (int e = 0; e < pq.num_elements(); ++e) {
      const auto es = pq.element_spans(e);
      const std::array<const DirectionQuadrature::Span*, 3> sp{
          &dq[0].spans[static_cast<std::size_t>(es[0])],
          &dq[1].spans[static_cast<std::size_t>(es[1])],
          &dq[2].spans[static_cast<std::size_t>(es[2])]};
      const ElementDofs dofs = element_dofs(space, lay, cx.patch_dofs[pi],
                                            form_degree, sp, cx);
      emit(patch, dom.coeff[pi], space, sp, nq, dofs);
    }
  }
}

}  // namespace

SpMatD assemble_mass(const MultipatchGeometry& geom, const CubicalComplex& cx,
                     int form_degree, const IntegrationDomain& dom,
                     int quad_points) {
  const Index n = cx.num_cells(form_degree);
  std::vector<TripD> trips;
  const int k = form_degree;

  for_each_element(
      geom, cx, k, dom, quad_points,
      [&](const Patch& patch, double coeff, const TensorSplineSpace& space,
          const std::array<const DirectionQuadrature::Span*, 3>& sp, int nq,
          const ElementDofs& dofs) {
        const std::size_t na = dofs.list.size();
        Eigen::MatrixXd local = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(na),
                                                      static_cast<Eigen::Index>(na));
        std::vector<double> vals(na);
        for (int q2 = 0; q2 < nq; ++q2)
          for (int q1 = 0; q1 < nq; ++q1)
            for (int q0 = 0; q0 < nq; ++q0) {
              const Vec3 xi(sp[0]->x[static_cast<std::size_t>(q0)],
                            sp[1]->x[static_cast<std::size_t>(q1)],
                            sp[2]->x[static_cast<std::size_t>(q2)]);
              const GeometryEval g = patch.eval_geometry(xi);
              const double w = sp[0]->w[static_cast<std::size_t>(q0)] *
                               sp[1]->w[static_cast<std::size_t>(q1)] *
                               sp[2]->w[static_cast<std::size_t>(q2)] * coeff;
              Mat3 metric = Mat3::Identity();
              double scal = 1.0;
              if (k == 0) {
                scal = w * g.detJ;
              } else if (k == 1) {
                metric = (g.J.transpose() * g.J).inverse() * (w * g.detJ);
              } else if (k == 2) {
                metric = (g.J.transpose() * g.J) * (w / g.detJ);
              } else {
                scal = w / g.detJ;
              }
              for (std::size_t i = 0; i < na; ++i) {
                const auto& d = dofs.list[i];
                vals[i] = d.sign *
                          factor_value(space, d.comp, 0, *sp[0], q0, d.ia) *
                          factor_value(space, d.comp, 1, *sp[1], q1, d.ib) *
                          factor_value(space, d.comp, 2, *sp[2], q2, d.ic);
              }
              if (k == 0 || k == 3) {
                for (std::size_t i = 0; i < na; ++i)
                  for (std::size_t j = 0; j <= i; ++j)
                    local(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                        scal * vals[i] * vals[j];
              } else {
                for (std::size_t i = 0; i < na; ++i)
                  for (std::size_t j = 0; j <= i; ++j)
                    local(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                        metric(dofs.list[i].comp, dofs.list[j].comp) * vals[i] *
                        vals[j];
              }
            }
        for (std::size_t i = 0; i < na; ++i)
          for (std::size_t j = 0; j <= i; ++j) {
            const double v = local(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (v == 0.0) continue;
            trips.emplace_back(dofs.list[i].global, dofs.list[j].global, v);
            if (i != j) trips.emplace_back(dofs.list[j].global, dofs.list[i].global, v);
          }
      });

  SpMatD m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

SpMatD stiffness_from_mass(const CubicalComplex& cx, int which, const SpMatD& mass) {
  const SpMatD inc = (which == 0) ? cx.G.cast<double>() : cx.C.cast<double>();
  return SpMatD(inc.transpose() * mass * inc);
}

SpMatD assemble_stiffness_direct(const MultipatchGeometry& geom,
                                 const CubicalComplex& cx, int which,
                                 const IntegrationDomain& dom, int quad_points) {
  const int k = which;  // 0: gradients of S^0, 1: curls of S^1
  const Index n = cx.num_cells(k);
  std::vector<TripD> trips;

  for_each_element(
      geom, cx, k, dom, quad_points,
      [&](const Patch& patch, double coeff, const TensorSplineSpace& space,
          const std::array<const DirectionQuadrature::Span*, 3>& sp, int nq,
          const ElementDofs& dofs) {
        const int p = space.degree();
        const std::size_t na = dofs.list.size();
        Eigen::MatrixXd local = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(na),
                                                      static_cast<Eigen::Index>(na));
        std::vector<Vec3> vecs(na);
        for (int q2 = 0; q2 < nq; ++q2)
          for (int q1 = 0; q1 < nq; ++q1)
            for (int q0 = 0; q0 < nq; ++q0) {
              const Vec3 xi(sp[0]->x[static_cast<std::size_t>(q0)],
                            sp[1]->x[static_cast<std::size_t>(q1)],
                            sp[2]->x[static_cast<std::size_t>(q2)]);
              const GeometryEval g = patch.eval_geometry(xi);
              const double w = sp[0]->w[static_cast<std::size_t>(q0)] *
                               sp[1]->w[static_cast<std::size_t>(q1)] *
                               sp[2]->w[static_cast<std::size_t>(q2)] * coeff;
              const int qq[3] = {q0, q1, q2};
              Mat3 metric;
              if (k == 0) {
                // physical gradient pairing: (J^T J)^{-1} detJ
                metric = (g.J.transpose() * g.J).inverse() * (w * g.detJ);
              } else {
                // Piola image of the reference curl: (J^T J) / detJ
                metric = (g.J.transpose() * g.J) * (w / g.detJ);
              }
              for (std::size_t i = 0; i < na; ++i) {
                const auto& d = dofs.list[i];
                const int off[3] = {d.ia, d.ib, d.ic};
                if (k == 0) {
                  // reference gradient of the scalar basis function
                  Vec3 grad;
                  for (int dir = 0; dir < 3; ++dir) {
                    double v = d.sign;
                    for (int e3 = 0; e3 < 3; ++e3) {
                      if (e3 == dir)
                        v *= factor_deriv_b(*sp[static_cast<std::size_t>(e3)], qq[e3],
                                            off[e3], p);
                      else
                        v *= factor_value(space, d.comp, e3,
                                          *sp[static_cast<std::size_t>(e3)], qq[e3],
                                          off[e3]);
                    }
                    grad[dir] = v;
                  }
                  vecs[i] = grad;
                } else {
                  // reference curl of the component-d basis: grad(f) x e_d,
                  // with derivatives only in the non-reduced directions
                  const int dcomp = d.comp;
                  Vec3 gradf = Vec3::Zero();
                  for (int dir = 0; dir < 3; ++dir) {
                    if (dir == dcomp) continue;
                    double v = d.sign;
                    for (int e3 = 0; e3 < 3; ++e3) {
                      if (e3 == dir)
                        v *= factor_deriv_b(*sp[static_cast<std::size_t>(e3)], qq[e3],
                                            off[e3], p);
                      else
                        v *= factor_value(space, dcomp, e3,
                                          *sp[static_cast<std::size_t>(e3)], qq[e3],
                                          off[e3]);
                    }
                    gradf[dir] = v;
                  }
                  Vec3 ed = Vec3::Zero();
                  ed[dcomp] = 1.0;
                  vecs[i] = gradf.cross(ed);
                }
              }
              for (std::size_t i = 0; i < na; ++i)
                for (std::size_t j = 0; j <= i; ++j)
                  local(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                      vecs[i].dot(metric * vecs[j]);
            }
        for (std::size_t i = 0; i < na; ++i)
          for (std::size_t j = 0; j <= i; ++j) {
            const double v = local(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (v == 0.0) continue;
            trips.emplace_back(dofs.list[i].global, dofs.list[j].global, v);
            if (i != j) trips.emplace_back(dofs.list[j].global, dofs.list[i].global, v);
          }
      });

  SpMatD m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

namespace {

VecXd assemble_edge_load(const MultipatchGeometry& geom, const CubicalComplex& cx,
                         const std::function<Vec3(const Vec3&)>& field,
                         const IntegrationDomain& dom, int quad_points) {
  VecXd load = VecXd::Zero(cx.num_cells(1));
  for_each_element(
      geom, cx, 1, dom, quad_points,
      [&](const Patch& patch, double coeff, const TensorSplineSpace& space,
          const std::array<const DirectionQuadrature::Span*, 3>& sp, int nq,
          const ElementDofs& dofs) {
        for (int q2 = 0; q2 < nq; ++q2)
          for (int q1 = 0; q1 < nq; ++q1)
            for (int q0 = 0; q0 < nq; ++q0) {
              const Vec3 xi(sp[0]->x[static_cast<std::size_t>(q0)],
                            sp[1]->x[static_cast<std::size_t>(q1)],
                            sp[2]->x[static_cast<std::size_t>(q2)]);
              const GeometryEval g = patch.eval_geometry(xi);
              const double w = sp[0]->w[static_cast<std::size_t>(q0)] *
                               sp[1]->w[static_cast<std::size_t>(q1)] *
                               sp[2]->w[static_cast<std::size_t>(q2)] * coeff;
              // covariant basis pairing: J^{-1} F(x) picks up the reference
              // component, times detJ for the volume element
              const Vec3 fref = g.J.inverse() * field(g.x) * (w * g.detJ);
              const int qq[3] = {q0, q1, q2};
              for (const auto& d : dofs.list) {
                const int off[3] = {d.ia, d.ib, d.ic};
                double v = d.sign;
                for (int e3 = 0; e3 < 3; ++e3)
                  v *= factor_value(space, d.comp, e3, *sp[static_cast<std::size_t>(e3)],
                                    qq[e3], off[e3]);
                load[d.global] += v * fref[d.comp];
              }
            }
      });
  return load;
}

}  // namespace

VecXd assemble_field_load(const MultipatchGeometry& geom, const CubicalComplex& cx,
                          const SourceField& field, const IntegrationDomain& dom,
                          int quad_points) {
  if (field.is_zero()) return VecXd::Zero(cx.num_cells(1));
  return assemble_edge_load(
      geom, cx, [&](const Vec3& x) { return field.H(x); }, dom, quad_points);
}

VecXd assemble_potential_load(const MultipatchGeometry& geom,
                              const CubicalComplex& cx, const SourceField& field,
                              const IntegrationDomain& dom, int quad_points) {
  if (field.is_zero()) return VecXd::Zero(cx.num_cells(1));
  return assemble_edge_load(
      geom, cx, [&](const Vec3& x) { return field.A(x); }, dom, quad_points);
}

VecXd assemble_current_load(const MultipatchGeometry& geom, const CubicalComplex& cx,
                            const std::function<Vec3(const Vec3&)>& j,
                            const IntegrationDomain& dom, int quad_points) {
  return assemble_edge_load(geom, cx, j, dom, quad_points);
}

VecXd apply_edge_mass(const MultipatchGeometry& geom, const CubicalComplex& cx,
                      const VecXd& u, const IntegrationDomain& dom,
                      int quad_points) {
  VecXd out = VecXd::Zero(cx.num_cells(1));
  for_each_element(
      geom, cx, 1, dom, quad_points,
      [&](const Patch& patch, double coeff, const TensorSplineSpace& space,
          const std::array<const DirectionQuadrature::Span*, 3>& sp, int nq,
          const ElementDofs& dofs) {
        const std::size_t na = dofs.list.size();
        std::vector<double> coeffs(na), vals(na);
        bool any = false;
        for (std::size_t i = 0; i < na; ++i) {
          coeffs[i] = dofs.list[i].sign * u[dofs.list[i].global];
          any |= (coeffs[i] != 0.0);
        }
        if (!any) return;
        for (int q2 = 0; q2 < nq; ++q2)
          for (int q1 = 0; q1 < nq; ++q1)
            for (int q0 = 0; q0 < nq; ++q0) {
              const Vec3 xi(sp[0]->x[static_cast<std::size_t>(q0)],
                            sp[1]->x[static_cast<std::size_t>(q1)],
                            sp[2]->x[static_cast<std::size_t>(q2)]);
              const GeometryEval g = patch.eval_geometry(xi);
              const double w = sp[0]->w[static_cast<std::size_t>(q0)] *
                               sp[1]->w[static_cast<std::size_t>(q1)] *
                               sp[2]->w[static_cast<std::size_t>(q2)] * coeff;
              const Mat3 metric = (g.J.transpose() * g.J).inverse() * (w * g.detJ);
              Vec3 f = Vec3::Zero();
              for (std::size_t i = 0; i < na; ++i) {
                const auto& d = dofs.list[i];
                vals[i] = d.sign *
                          factor_value(space, d.comp, 0, *sp[0], q0, d.ia) *
                          factor_value(space, d.comp, 1, *sp[1], q1, d.ib) *
                          factor_value(space, d.comp, 2, *sp[2], q2, d.ic);
                // the restriction signs in coeffs and vals cancel pairwise
                if (coeffs[i] != 0.0) f[d.comp] += coeffs[i] * vals[i];
              }
              const Vec3 mf = metric * f;
              for (std::size_t i = 0; i < na; ++i)
                out[dofs.list[i].global] += vals[i] * mf[dofs.list[i].comp];
            }
      });
  return out;
}

VecXd assemble_scalar_load(const MultipatchGeometry& geom, const CubicalComplex& cx,
                           const std::function<double(const Vec3&)>& f,
                           const IntegrationDomain& dom, int quad_points) {
  VecXd load = VecXd::Zero(cx.num_cells(0));
  for_each_element(
      geom, cx, 0, dom, quad_points,
      [&](const Patch& patch, double coeff, const TensorSplineSpace& space,
          const std::array<const DirectionQuadrature::Span*, 3>& sp, int nq,
          const ElementDofs& dofs) {
        for (int q2 = 0; q2 < nq; ++q2)
          for (int q1 = 0; q1 < nq; ++q1)
            for (int q0 = 0; q0 < nq; ++q0) {
              const Vec3 xi(sp[0]->x[static_cast<std::size_t>(q0)],
                            sp[1]->x[static_cast<std::size_t>(q1)],
                            sp[2]->x[static_cast<std::size_t>(q2)]);
              const GeometryEval g = patch.eval_geometry(xi);
              const double w = sp[0]->w[static_cast<std::size_t>(q0)] *
                               sp[1]->w[static_cast<std::size_t>(q1)] *
                               sp[2]->w[static_cast<std::size_t>(q2)] * coeff;
              const double fv = f(g.x) * w * g.detJ;
              const int qq[3] = {q0, q1, q2};
              for (const auto& d : dofs.list) {
                const int off[3] = {d.ia, d.ib, d.ic};
                double v = d.sign;
                for (int e3 = 0; e3 < 3; ++e3)
                  v *= factor_value(space, d.comp, e3, *sp[static_cast<std::size_t>(e3)],
                                    qq[e3], off[e3]);
                load[d.global] += v * fv;
              }
            }
      });
  return load;
}

InterfaceCouplingPlan interface_coupling(
    const CubicalComplex& cx,
    const std::vector<std::vector<std::pair<Index, double>>>& generators) {
  InterfaceCouplingPlan plan;

  std::vector<char> on_interface_e(static_cast<std::size_t>(cx.num_cells(1)), 0);
  for (Index q = 0; q < cx.num_cells(2); ++q)
    if (cx.is_interface_quad(q))
      for (SpMatI::InnerIterator it(cx.B2, q); it; ++it)
        on_interface_e[static_cast<std::size_t>(it.row())] = 1;

  for (Index e = 0; e < cx.num_cells(1); ++e) {
    if (!cx.touches_conductor[1][static_cast<std::size_t>(e)]) continue;
    plan.conductor_edges.push_back(e);
    if (cx.on_boundary[1][static_cast<std::size_t>(e)])
      throw TopologyError("conductor touches the domain boundary (edge " +
                          std::to_string(e) + "), unsupported");
    if (on_interface_e[static_cast<std::size_t>(e)]) {
      plan.interface_edges.push_back(e);
    } else if (cx.touches_insulator[1][static_cast<std::size_t>(e)]) {
      throw TopologyError("pinched interface at edge " + std::to_string(e));
    } else {
      plan.interior_edges.push_back(e);
    }
  }

  std::vector<Index> phi_col(static_cast<std::size_t>(cx.num_cells(0)), -1);
  for (Index v = 0; v < cx.num_cells(0); ++v)
    if (cx.touches_insulator[0][static_cast<std::size_t>(v)] &&
        !cx.on_boundary[0][static_cast<std::size_t>(v)]) {
      phi_col[static_cast<std::size_t>(v)] = static_cast<Index>(plan.phi_vertices.size());
      plan.phi_vertices.push_back(v);
    }

  const Index ngen = static_cast<Index>(generators.size());
  for (Index g = 0; g < ngen; ++g)
    for (const auto& [e, v] : generators[static_cast<std::size_t>(g)])
      if (cx.on_boundary[1][static_cast<std::size_t>(e)] && v != 0.0)
        throw TopologyError(
            "generator " + std::to_string(g) +
            " has a nonzero coefficient on Dirichlet boundary edge " +
            std::to_string(e));

  std::vector<TripD> tphi, tgen;
  for (const Index e : plan.interface_edges) {
    // Glued gradient row of this edge: -1/+1 at its endpoints in the owner
    // orientation, which iso_sign relates to the low->high convention.
    const auto verts = cx.edge_vertices[static_cast<std::size_t>(e)];
    const double iso = static_cast<double>(cx.iso_sign[1][static_cast<std::size_t>(e)]);
    if (phi_col[static_cast<std::size_t>(verts[0])] >= 0)
      tphi.emplace_back(e, phi_col[static_cast<std::size_t>(verts[0])], -iso);
    if (phi_col[static_cast<std::size_t>(verts[1])] >= 0)
      tphi.emplace_back(e, phi_col[static_cast<std::size_t>(verts[1])], iso);
  }
  for (Index g = 0; g < ngen; ++g)
    for (const auto& [e, v] : generators[static_cast<std::size_t>(g)])
      if (on_interface_e[static_cast<std::size_t>(e)] && v != 0.0)
        tgen.emplace_back(e, g, v);
  plan.phi_part.resize(cx.num_cells(1), static_cast<Index>(plan.phi_vertices.size()));
  plan.phi_part.setFromTriplets(tphi.begin(), tphi.end());
  plan.gen_part.resize(cx.num_cells(1), ngen);
  plan.gen_part.setFromTriplets(tgen.begin(), tgen.end());
  return plan;
}

}  // namespace igacoh
