// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SparseCholesky>

#include "igacoh/assembly.hpp"
#include "igacoh/cohomology.hpp"
#include "igacoh/fixtures.hpp"
#include "oracles.hpp"

using namespace igacoh;

namespace {

double frob(const SpMatD& m) {
  double acc = 0.0;
  for (int c = 0; c < m.outerSize(); ++c)
    for (SpMatD::InnerIterator it(m, c); it; ++it) acc += it.value() * it.value();
  return std::sqrt(acc);
}

double total_sum(const SpMatD& m) {
  double acc = 0.0;
  for (int c = 0; c < m.outerSize(); ++c)
    for (SpMatD::InnerIterator it(m, c); it; ++it) acc += it.value();
  return acc;
}

}  // namespace

TEST_CASE("scalar mass integrates the partition of unity to the volume") {
  {
    const MultipatchGeometry g = fixtures::single_cube(1, 1);
    const CubicalComplex cx = glue(g);
    const SpMatD m0 = assemble_mass(g, cx, 0, IntegrationDomain::all(g));
    CHECK(total_sum(m0) == doctest::Approx(1.0).epsilon(1e-13));
  }
  {
    MultipatchGeometry g;
    g.patches.push_back(fixtures::box_patch("aff", Vec3::Zero(), Vec3(2, 3, 4), 2, 2,
                                            Subdomain::insulator));
    const CubicalComplex cx = glue(g);
    const SpMatD m0 = assemble_mass(g, cx, 0, IntegrationDomain::all(g));
    CHECK(total_sum(m0) == doctest::Approx(24.0).epsilon(1e-13));
  }
}

TEST_CASE("mass matrices are symmetric positive definite") {
  MultipatchGeometry g;
  g.patches.push_back(fixtures::curved_patch(2, 2));
  const CubicalComplex cx = glue(g);
  for (int k = 0; k <= 3; ++k) {
    const SpMatD m = assemble_mass(g, cx, k, IntegrationDomain::all(g));
    const SpMatD mt = SpMatD(m.transpose());
    CHECK(frob(SpMatD(m - mt)) < 1e-13 * frob(m));
    Eigen::SimplicialLLT<SpMatD> llt(m);
    CHECK(llt.info() == Eigen::Success);
  }
}

// Dense brute-force oracle: every entry from independent per-point pullback
// evaluations (no factor caches, no sign shortcuts), same quadrature rule.
TEST_CASE("vector mass agrees with a dense brute-force oracle on a curved patch") {
  MultipatchGeometry g;
  g.patches.push_back(fixtures::curved_patch(2, 1));
  const CubicalComplex cx = glue(g);
  const Patch& p = g.patches[0];
  const int nq = 6;  // 2(p+1)
  const SpMatD m1 = assemble_mass(g, cx, 1, IntegrationDomain::all(g), nq);

  const TensorSplineSpace s1(p.knot_vectors(), 1);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(s1.dim(), s1.dim());
  const auto& gr = gauss_legendre(nq);
  const auto spans0 = p.knot_vectors()[0].element_spans();
  for (int e2 : p.knot_vectors()[2].element_spans())
    for (int e1 : p.knot_vectors()[1].element_spans())
      for (int e0 : spans0)
        for (int q2 = 0; q2 < nq; ++q2)
          for (int q1 = 0; q1 < nq; ++q1)
            for (int q0 = 0; q0 < nq; ++q0) {
              const auto map1d = [&](const KnotVector& kv, int mu, double t) {
                return 0.5 * (kv.knot(mu) + kv.knot(mu + 1)) +
                       0.5 * (kv.knot(mu + 1) - kv.knot(mu)) * t;
              };
              const Vec3 xi(map1d(p.knot_vectors()[0], e0, gr.points[q0]),
                            map1d(p.knot_vectors()[1], e1, gr.points[q1]),
                            map1d(p.knot_vectors()[2], e2, gr.points[q2]));
              const double jac1d =
                  0.125 *
                  (p.knot_vectors()[0].knot(e0 + 1) - p.knot_vectors()[0].knot(e0)) *
                  (p.knot_vectors()[1].knot(e1 + 1) - p.knot_vectors()[1].knot(e1)) *
                  (p.knot_vectors()[2].knot(e2 + 1) - p.knot_vectors()[2].knot(e2));
              const double w =
                  gr.weights[q0] * gr.weights[q1] * gr.weights[q2] * jac1d;
              const GeometryEval ge = p.eval_geometry(xi);
              const auto vals = pullback_basis(p, s1, xi);
              for (const auto& [i, vi] : vals)
                for (const auto& [j, vj] : vals)
                  dense(i, j) += w * ge.detJ * vi.dot(vj);
            }
  // single patch: global edge ids equal local DoF ids with +1 edge signs
  double err = 0.0;
  for (Index i = 0; i < s1.dim(); ++i)
    for (Index j = 0; j < s1.dim(); ++j) err += std::pow(m1.coeff(i, j) - dense(i, j), 2);
  CHECK(std::sqrt(err) < 1e-10 * frob(m1));

  // variational-crime scale of the default p+1 rule on this curved patch
  const SpMatD m1_default = assemble_mass(g, cx, 1, IntegrationDomain::all(g));
  CHECK(frob(SpMatD(m1_default - m1)) < 1e-2 * frob(m1));
}

TEST_CASE("quadrature refinement leaves polynomial-geometry masses unchanged") {
  const MultipatchGeometry g = fixtures::two_patch_cube(2, 1);
  const CubicalComplex cx = glue(g);
  for (int k = 0; k <= 3; ++k) {
    const SpMatD a = assemble_mass(g, cx, k, IntegrationDomain::all(g), 3);
    const SpMatD b = assemble_mass(g, cx, k, IntegrationDomain::all(g), 4);
    CHECK(frob(SpMatD(a - b)) < 1e-12 * frob(a));
  }
}

TEST_CASE("stiffness factorization equals direct assembly") {
  // polynomial multipatch
  {
    const MultipatchGeometry g = fixtures::two_patch_cube(2, 1);
    const CubicalComplex cx = glue(g);
    const SpMatD m1 = assemble_mass(g, cx, 1, IntegrationDomain::all(g));
    const SpMatD m2 = assemble_mass(g, cx, 2, IntegrationDomain::all(g));
    const SpMatD a0f = stiffness_from_mass(cx, 0, m1);
    const SpMatD a1f = stiffness_from_mass(cx, 1, m2);
    const SpMatD a0d = assemble_stiffness_direct(g, cx, 0, IntegrationDomain::all(g));
    const SpMatD a1d = assemble_stiffness_direct(g, cx, 1, IntegrationDomain::all(g));
    CHECK(frob(SpMatD(a0f - a0d)) < 1e-12 * frob(a0d));
    CHECK(frob(SpMatD(a1f - a1d)) < 1e-12 * frob(a1d));
  }
  // rational multipatch annulus
  {
    const MultipatchGeometry g = fixtures::annulus_washer(1);
    const CubicalComplex cx = glue(g);
    const SpMatD m1 = assemble_mass(g, cx, 1, IntegrationDomain::all(g));
    const SpMatD m2 = assemble_mass(g, cx, 2, IntegrationDomain::all(g));
    const SpMatD a0f = stiffness_from_mass(cx, 0, m1);
    const SpMatD a1f = stiffness_from_mass(cx, 1, m2);
    const SpMatD a0d = assemble_stiffness_direct(g, cx, 0, IntegrationDomain::all(g));
    const SpMatD a1d = assemble_stiffness_direct(g, cx, 1, IntegrationDomain::all(g));
    CHECK(frob(SpMatD(a0f - a0d)) < 1e-12 * frob(a0d));
    CHECK(frob(SpMatD(a1f - a1d)) < 1e-12 * frob(a1d));
  }
}

TEST_CASE("stiffness kernels") {
  const MultipatchGeometry g = fixtures::two_patch_cube(2, 1);
  const CubicalComplex cx = glue(g);
  const SpMatD m1 = assemble_mass(g, cx, 1, IntegrationDomain::all(g));
  const SpMatD m2 = assemble_mass(g, cx, 2, IntegrationDomain::all(g));
  const SpMatD a0 = stiffness_from_mass(cx, 0, m1);
  const SpMatD a1 = stiffness_from_mass(cx, 1, m2);

  const VecXd ones = VecXd::Ones(cx.num_cells(0));
  CHECK((a0 * ones).cwiseAbs().maxCoeff() < 1e-12 * frob(a0));

  VecXd v(cx.num_cells(0));
  for (Index i = 0; i < v.size(); ++i) v[i] = oracle::urand(-1, 1);
  const VecXd gv = cx.G.cast<double>() * v;
  CHECK((a1 * gv).cwiseAbs().maxCoeff() < 1e-12 * frob(a1) * gv.norm());
}

TEST_CASE("apply_edge_mass matches the assembled matrix") {
  const MultipatchGeometry g = fixtures::two_patch_cube(2, 1);
  const CubicalComplex cx = glue(g);
  const SpMatD m1 = assemble_mass(g, cx, 1, IntegrationDomain::all(g));
  VecXd u(cx.num_cells(1));
  for (Index i = 0; i < u.size(); ++i) u[i] = oracle::urand(-1, 1);
  const VecXd direct = m1 * u;
  const VecXd free_form = apply_edge_mass(g, cx, u, IntegrationDomain::all(g));
  CHECK((direct - free_form).cwiseAbs().maxCoeff() < 1e-12 * direct.cwiseAbs().maxCoeff());
}

TEST_CASE("zero source gives zero loads") {
  const MultipatchGeometry g = fixtures::single_cube(2, 1);
  const CubicalComplex cx = glue(g);
  SourceSpec spec;  // kind = none
  const auto src = make_source(spec);
  CHECK(assemble_field_load(g, cx, *src, IntegrationDomain::all(g)).norm() == 0.0);
}

TEST_CASE("constant field against boundary-vanishing gradients") {
  const MultipatchGeometry g = fixtures::single_cube(2, 3);
  const CubicalComplex cx = glue(g);
  SourceSpec spec;
  spec.kind = SourceSpec::Kind::uniform;
  spec.uniform_h = Vec3(0.3, -1.1, 0.77);
  const auto src = make_source(spec);
  const VecXd m = assemble_field_load(g, cx, *src, IntegrationDomain::all(g));
  const VecXd gm = cx.G.cast<double>().transpose() * m;
  // interior vertex entries integrate c . grad(w) with w in H^1_0: zero
  for (Index v = 0; v < cx.num_cells(0); ++v)
    if (!cx.on_boundary[0][static_cast<std::size_t>(v)])
      CHECK(std::abs(gm[v]) < 1e-10);
}

TEST_CASE("biot-savart loop: on-axis closed form and consistency") {
  const Vec3 center(0.1, -0.2, 0.05);
  const Vec3 axis = Vec3(0.3, 0.4, 1.0).normalized();
  const double R = 0.7, I = 3.5;
  // on-axis field: I R^2 / (2 (R^2 + d^2)^{3/2}) along the axis
  for (double d : {-0.9, -0.2, 0.0, 0.4, 1.7}) {
    const Vec3 x = center + d * axis;
    const Vec3 h = loop_biot_savart(center, axis, R, I, x);
    const double expect = I * R * R / (2.0 * std::pow(R * R + d * d, 1.5));
    CHECK((h - expect * axis).norm() < 1e-9 * std::abs(expect));
  }
  // curl A = mu0 H away from the loop (finite differences)
  const Vec3 probe(0.6, 0.1, 0.9);
  const double h = 1e-5;
  Mat3 jac;
  for (int d = 0; d < 3; ++d) {
    Vec3 a = probe, b = probe;
    a[d] += h;
    b[d] -= h;
    jac.col(d) = (loop_vector_potential(center, axis, R, I, a) -
                  loop_vector_potential(center, axis, R, I, b)) /
                 (2 * h);
  }
  const Vec3 curl_a(jac(2, 1) - jac(1, 2), jac(0, 2) - jac(2, 0), jac(1, 0) - jac(0, 1));
  const Vec3 hs = loop_biot_savart(center, axis, R, I, probe);
  CHECK((curl_a - kMu0 * hs).norm() < 1e-7 * kMu0 * hs.norm());
  // curl H = 0 away from the loop
  for (int d = 0; d < 3; ++d) {
    Vec3 a = probe, b = probe;
    a[d] += h;
    b[d] -= h;
    jac.col(d) =
        (loop_biot_savart(center, axis, R, I, a) - loop_biot_savart(center, axis, R, I, b)) /
        (2 * h);
  }
  const Vec3 curl_h(jac(2, 1) - jac(1, 2), jac(0, 2) - jac(2, 0), jac(1, 0) - jac(0, 1));
  CHECK(curl_h.norm() < 1e-6 * hs.norm() / R);
}

TEST_CASE("coil load vector agrees with the over-integration oracle") {
  const MultipatchGeometry g = fixtures::conductor_block(2, 1);
  const CubicalComplex cx = glue(g);
  SourceSpec spec;
  spec.kind = SourceSpec::Kind::coil;
  spec.coil_center = Vec3(0.015, 0.015, 0.015);
  spec.coil_axis = Vec3::UnitZ();
  spec.coil_radius = 0.12;  // well outside the geometry: smooth integrand
  spec.coil_loops = 2;
  spec.coil_spacing = 0.004;
  spec.current_total = 20.0;
  const auto src = make_source(spec);
  // converged-rule agreement
  const VecXd m6 = assemble_field_load(g, cx, *src, IntegrationDomain::all(g), 6);
  const VecXd m8 = assemble_field_load(g, cx, *src, IntegrationDomain::all(g), 8);
  CHECK((m6 - m8).norm() < 1e-8 * m6.norm());
  // the default p+1 rule sits within the expected quadrature error of it
  const VecXd m = assemble_field_load(g, cx, *src, IntegrationDomain::all(g));
  CHECK((m - m8).norm() < 1e-5 * m8.norm());
}

TEST_CASE("interface coupling plan") {
  // contractible conductor, no generators: substitution is the gradient trace
  {
    const MultipatchGeometry g = fixtures::conductor_block(2, 1);
    const CubicalComplex cx = glue(g);
    const InterfaceCouplingPlan plan = interface_coupling(cx, {});
    CHECK(plan.gen_part.cols() == 0);
    CHECK(plan.interior_edges.size() + plan.interface_edges.size() ==
          plan.conductor_edges.size());
    // phi-part rows: zero row sums, two entries per interface edge
    for (const Index e : plan.interface_edges) {
      double sum = 0.0;
      int cnt = 0;
      for (int c = 0; c < plan.phi_part.outerSize(); ++c)
        for (SpMatD::InnerIterator it(plan.phi_part, c); it; ++it)
          if (it.row() == e) {
            sum += it.value();
            ++cnt;
          }
      CHECK(cnt == 2);
      CHECK(sum == 0.0);
    }
    // interior rows empty
    for (const Index e : plan.interior_edges) {
      for (int c = 0; c < plan.phi_part.outerSize(); ++c)
        for (SpMatD::InnerIterator it(plan.phi_part, c); it; ++it)
          CHECK(it.row() != e);
    }
  }
  // washer: exactly one generator-trace column with nonzero interface entries
  {
    const MultipatchGeometry g = fixtures::square_washer(2, 1);
    const CubicalComplex cx = glue(g);
    const CohomologyBasis basis = compute_cohomology_basis(cx);
    REQUIRE(basis.generators.size() == 1);
    std::vector<std::vector<std::pair<Index, double>>> lists{
        basis.generators[0].spline_coeffs};
    const InterfaceCouplingPlan plan = interface_coupling(cx, lists);
    CHECK(plan.gen_part.cols() == 1);
    CHECK(plan.gen_part.nonZeros() > 0);
  }
}
