// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "igacoh/knots.hpp"
#include "oracles.hpp"

using namespace igacoh;

TEST_CASE("hat function midpoint") {
  KnotVector kv(1, {0, 0, 1, 1});
  CHECK(eval_bspline(kv, 0, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("partition of unity at 1000 random points") {
  const KnotVector kvs[] = {KnotVector::uniform(2, 4), KnotVector::uniform(3, 5),
                            KnotVector(2, {0, 0, 0, 0.3, 0.3, 0.7, 1, 1, 1})};
  for (const KnotVector& kv : kvs) {
    for (int trial = 0; trial < 1000; ++trial) {
      const double x = oracle::urand();
      double sum = 0.0;
      for (int i = 0; i < kv.num_basis(); ++i) sum += kv.eval(i, x);
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    // endpooints
    CHECK(kv.eval(0, 0.0) == 1.0);
    CHECK(kv.eval(kv.num_basis() - 1, 1.0) == 1.0);
  }
}

TEST_CASE("values match recursive Cox-de Boor oracle") {
  KnotVector kv(2, {0, 0, 0, 0.5, 1, 1, 1});
  // the spec's pinned point first
  const double v = eval_bspline(kv, 1, 0.25);
  CHECK(v == doctest::Approx(oracle::cox_de_boor(kv.knots(), 1, 2, 0.25)).epsilon(1e-14));
  for (int i = 0; i < kv.num_basis(); ++i)
    for (int t = 0; t < 50; ++t) {
      const double x = oracle::urand();
      CHECK(eval_bspline(kv, i, x) ==
            doctest::Approx(oracle::cox_de_boor(kv.knots(), i, 2, x)).epsilon(1e-13));
    }
  KnotVector kv3 = KnotVector::uniform(3, 4);
  for (int i = 0; i < kv3.num_basis(); ++i)
    for (int t = 0; t < 50; ++t) {
      const double x = oracle::urand();
      CHECK(eval_bspline(kv3, i, x) ==
            doctest::Approx(oracle::cox_de_boor(kv3.knots(), i, 3, x)).epsilon(1e-13));
    }
}

TEST_CASE("local support is exact") {
  KnotVector kv(2, {0, 0, 0, 0.25, 0.5, 0.75, 1, 1, 1});
  for (int i = 0; i < kv.num_basis(); ++i)
    for (int t = 0; t < 200; ++t) {
      const double x = oracle::urand();
      const double v = kv.eval(i, x);
      if (x < kv.knot(i) || x > kv.knot(i + kv.degree() + 1)) CHECK(v == 0.0);
    }
}

TEST_CASE("index out of range") {
  KnotVector kv(1, {0, 0, 1, 1});
  CHECK_THROWS_AS(eval_bspline(kv, -1, 0.5), ArgumentError);
  CHECK_THROWS_AS(eval_bspline(kv, 2, 0.5), ArgumentError);
}

TEST_CASE("curry-schoenberg pinned values") {
  // degree 1: the single D is the constant 1
  KnotVector kv1(1, {0, 0, 1, 1});
  CHECK(eval_curry_schoenberg(kv1, 0, 0.3) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eval_curry_schoenberg(kv1, 0, 0.9) == doctest::Approx(1.0).epsilon(1e-14));
  // degree 2 single element: D_0(0.5) = 2 * B_0^1(0.5) = 1
  KnotVector kv2(2, {0, 0, 0, 1, 1, 1});
  CHECK(eval_curry_schoenberg(kv2, 0, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("curry-schoenberg functions integrate to one") {
  const KnotVector kvs[] = {KnotVector::uniform(2, 3), KnotVector::uniform(4, 2),
                            KnotVector(3, {0, 0, 0, 0, 0.2, 0.9, 1, 1, 1, 1})};
  for (const KnotVector& kv : kvs) {
    ReducedKnotVector rkv(kv);
    // integrate span by span: the integrand is a polynomial inside each span
    const KnotVector& red = rkv.knot_vector();
    for (int i = 0; i < rkv.num_basis(); ++i) {
      double integral = 0.0;
      for (int mu : red.element_spans())
        integral += oracle::integrate([&](double x) { return rkv.eval(i, x); },
                                      red.knot(mu), red.knot(mu + 1), 1);
      CHECK(integral == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("derivative incidence matrix shape and action") {
  KnotVector kv(1, {0, 0, 0.5, 1, 1});  // n = 3
  SpMatI g = derivative_incidence(kv);
  REQUIRE(g.rows() == 2);
  REQUIRE(g.cols() == 3);
  Eigen::MatrixXi d = Eigen::MatrixXi(g);
  Eigen::MatrixXi expect(2, 3);
  expect << -1, 1, 0, 0, -1, 1;
  CHECK(d == expect);

  // constant spline has zero derivative
  for (int j = 0; j < 2; ++j) {
    int rowsum = 0;
    for (SpMatI::InnerIterator it(SpMatI(g.transpose()), j); it; ++it)
      rowsum += it.value();
    (void)rowsum;
  }
  VecXd ones = VecXd::Ones(3);
  Eigen::VectorXi gi = Eigen::MatrixXi(g) * Eigen::VectorXi::Ones(3);
  CHECK(gi.cwiseAbs().maxCoeff() == 0);

  // two nonzeros per row, row sum zero
  for (int p = 1; p <= 4; ++p) {
    KnotVector k2 = KnotVector::uniform(p, 3);
    SpMatI g2 = derivative_incidence(k2);
    Eigen::MatrixXi m = Eigen::MatrixXi(g2);
    for (int r = 0; r < m.rows(); ++r) {
      CHECK(m.row(r).cwiseAbs().sum() == 2);
      CHECK(m.row(r).sum() == 0);
    }
  }
}

TEST_CASE("spline derivative via incidence matches finite differences") {
  for (int p = 1; p <= 5; ++p) {
    KnotVector kv = KnotVector::uniform(p, 4);
    ReducedKnotVector rkv(kv);
    SpMatI g = derivative_incidence(kv);
    const int n = kv.num_basis();
    for (int rep = 0; rep < 10; ++rep) {
      VecXd u(n);
      for (int i = 0; i < n; ++i) u[i] = oracle::urand(-1.0, 1.0);
      VecXd du = VecXd::Zero(n - 1);
      for (int c = 0; c < g.outerSize(); ++c)
        for (SpMatI::InnerIterator it(g, c); it; ++it)
          du[it.row()] += it.value() * u[c];
      const auto spline = [&](double x) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += u[i] * kv.eval(i, x);
        return s;
      };
      for (int t = 0; t < 20; ++t) {
        const double x = oracle::urand(0.02, 0.98);
        double deriv = 0.0;
        for (int j = 0; j < n - 1; ++j) deriv += du[j] * rkv.eval(j, x);
        CHECK(deriv == doctest::Approx(oracle::central_diff(spline, x)).epsilon(2e-6));
      }
    }
  }
}

TEST_CASE("greville points") {
  using std::vector;
  CHECK(greville_points(KnotVector(2, {0, 0, 0, 1, 1, 1})) ==
        vector<double>{0.0, 0.5, 1.0});
  CHECK(greville_points(KnotVector(1, {0, 0, 0.5, 1, 1})) ==
        vector<double>{0.0, 0.5, 1.0});
  const vector<double> g3 =
      greville_points(KnotVector(3, {0, 0, 0, 0, 0.5, 1, 1, 1, 1}));
  REQUIRE(g3.size() == 5);
  const double expect[] = {0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0, 1.0};
  for (int i = 0; i < 5; ++i) CHECK(g3[i] == doctest::Approx(expect[i]).epsilon(1e-15));
  // strictly increasing, endpoints pinned
  for (int p = 1; p <= 4; ++p) {
    const auto g = greville_points(KnotVector::uniform(p, 5));
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  }
}

TEST_CASE("invalid knot vectors are rejected") {
  CHECK_THROWS_AS(KnotVector(2, {0, 0, 1, 1}), ArgumentError);          // too short
  CHECK_THROWS_AS(KnotVector(1, {0, 0, 0.6, 0.4, 1, 1}), ArgumentError);  // decreasing
  CHECK_THROWS_AS(KnotVector(2, {0, 0, 0.1, 0.5, 1, 1, 1}), ArgumentError);  // not open
  CHECK_THROWS_AS(KnotVector(2, {0, 0, 0, 0.5, 0.5, 0.5, 1, 1, 1}),
                  ArgumentError);  // interior multiplicity > degree
}

TEST_CASE("uniform refinement splits every span") {
  KnotVector kv(2, {0, 0, 0, 0.4, 1, 1, 1});
  KnotVector fine = kv.refined_uniform();
  CHECK(fine.num_basis() == kv.num_basis() + 2);
  CHECK(fine.element_spans().size() == 4);
}
