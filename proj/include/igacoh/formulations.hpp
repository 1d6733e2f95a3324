// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "igacoh/assembly.hpp"
#include "igacoh/cohomology.hpp"

namespace igacoh {

enum class Formulation { h_phi, t_omega, a_phi };
enum class APhiGauge { tree, sigma_reg };

struct PatchMaterial {
  std::string label = "default";
  double sigma = 0.0;  ///< S/m, zero in insulators
  double mu = kMu0;    ///< H/m
};

struct PhysicalConfig {
  double omega = 0.0;  ///< rad/s
  std::vector<PatchMaterial> materials;  ///< per patch
  SourceSpec source;
  APhiGauge aphi_gauge = APhiGauge::tree;
  double sigma_reg_rel = 1e-6;  ///< relative to max sigma, for the sigma_reg gauge

  void validate(const MultipatchGeometry& geom) const;
  double mu_of(Index patch) const { return materials[static_cast<std::size_t>(patch)].mu; }
  double sigma_of(Index patch) const { return materials[static_cast<std::size_t>(patch)].sigma; }
};

/// Solved state of one formulation. Field coefficient vectors live on the
/// glued spline basis over all global cells; block vectors keep the named
/// unknowns of the linear system.
struct Solution {
  Formulation formulation = Formulation::h_phi;
  double omega = 0.0;
  /// named blocks
  VecXc vector_block;     ///< H_c, T, or A unknowns (reduced ordering)
  VecXc scalar_block;     ///< phi, Omega, or phi_e unknowns
  VecXc harmonic_coeffs;  ///< one per cohomology generator (H-phi / T-Omega)
  /// expanded fields
  VecXc edge_field;        ///< conductor H/T coefficients, or A over all edges
  VecXc insulator_field;   ///< grad(phi)+H~ coefficients on insulator edges
  VecXc scalar_vertices;   ///< scalar potential over all vertices (zeros on Dirichlet)
  double residual = 0.0;   ///< relative linear-system residual
  Index n_unknowns = 0;
  bool reduced_potential = false;  ///< A-phi: A is the reaction potential
};

/// Assembled system sink for tests and diagnostics.
struct SystemDebug {
  SpMatC matrix;
  VecXc rhs;
};

Solution solve_h_phi(const MultipatchGeometry& geom, const CubicalComplex& cx,
                     const PhysicalConfig& config, const CohomologyBasis& basis,
                     SystemDebug* debug = nullptr);

Solution solve_t_omega(const MultipatchGeometry& geom, const CubicalComplex& cx,
                       const PhysicalConfig& config, const CohomologyBasis& basis,
                       SystemDebug* debug = nullptr);

Solution solve_a_phi(const MultipatchGeometry& geom, const CubicalComplex& cx,
                     const PhysicalConfig& config, SystemDebug* debug = nullptr);

/// Magnetostatic scalar solve (A0 u = f with homogeneous Dirichlet data):
/// returns the S^0 coefficients over all vertices. Used by the manufactured
/// convergence study.
VecXd solve_poisson_a0(const MultipatchGeometry& geom, const CubicalComplex& cx,
                       const std::function<double(const Vec3&)>& rhs_f);

/// Point evaluation of spline fields from glued coefficient vectors.
class FieldEvaluator {
 public:
  FieldEvaluator(const MultipatchGeometry& geom, const CubicalComplex& cx);

  struct Located {
    Index patch;
    Vec3 xi;
  };
  /// Inverse geometry lookup by Newton iteration, tolerance 1e-10.
  std::optional<Located> locate(const Vec3& x) const;

  /// Value of a 1-form (edge) coefficient field at a parametric point.
  Eigen::Vector3cd eval_edge_field(Index patch, const Vec3& xi, const VecXc& u) const;
  Eigen::Vector3d eval_edge_field(Index patch, const Vec3& xi, const VecXd& u) const;

  /// Curl of a 1-form field via the incidence route (C u evaluated in S^2).
  Eigen::Vector3cd eval_curl(Index patch, const Vec3& xi, const VecXc& u) const;
  /// Curl evaluated directly from basis derivatives (independent route).
  Eigen::Vector3d eval_curl_direct(Index patch, const Vec3& xi, const VecXd& u) const;

  /// Value and gradient of a 0-form (vertex) coefficient field.
  Complex eval_scalar(Index patch, const Vec3& xi, const VecXc& u) const;
  double eval_scalar(Index patch, const Vec3& xi, const VecXd& u) const;
  Eigen::Vector3cd eval_scalar_gradient(Index patch, const Vec3& xi, const VecXc& u) const;

  const MultipatchGeometry& geometry() const { return *geom_; }
  const CubicalComplex& complex() const { return *cx_; }

 private:
  template <typename Scalar>
  Eigen::Matrix<Scalar, 3, 1> edge_field_impl(Index patch, const Vec3& xi,
                                              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& u,
                                              int form_degree) const;
  const MultipatchGeometry* geom_;
  const CubicalComplex* cx_;
  std::vector<std::array<Vec3, 2>> bbox_;  ///< per patch control-point bounds
};

/// Physical fields of a solution at a point (complex phasors).
struct FieldSample {
  Eigen::Vector3cd j_c = Eigen::Vector3cd::Zero();  ///< conduction current density
  Eigen::Vector3cd h = Eigen::Vector3cd::Zero();    ///< magnetic field strength
  Eigen::Vector3cd b = Eigen::Vector3cd::Zero();    ///< flux density
  bool in_conductor = false;
};

class SolutionSampler {
 public:
  SolutionSampler(const MultipatchGeometry& geom, const CubicalComplex& cx,
                  const PhysicalConfig& config, const Solution& sol,
                  const CohomologyBasis* basis);

  /// Throws NotFoundError when the point lies outside the geometry.
  FieldSample sample(const Vec3& x) const;
  const FieldEvaluator& evaluator() const { return eval_; }

 private:
  Eigen::Vector3cd edge2_eval(Index patch, const Vec3& xi) const;

  FieldEvaluator eval_;
  const PhysicalConfig* config_;
  const Solution* sol_;
  std::unique_ptr<SourceField> source_;
  VecXc curl_coeffs_;  ///< S^2 coefficients of curl(edge_field)
};

/// sign(Re) * sqrt(Re^2 + Im^2), with sign(0) = +1.
double signed_magnitude(Complex z);

/// Re(z * exp(i omega t)): instantaneous value of a phasor.
double at_time(Complex z, double omega, double t);

}  // namespace igacoh
