// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "igacoh/complex.hpp"
#include "igacoh/quadrature.hpp"
#include "igacoh/sources.hpp"

namespace igacoh {

/// Patch selection and piecewise-constant coefficient for an integral.
/// Matrices/vectors are always sized over all global cells of the target
/// space; inactive patches simply contribute nothing.
struct IntegrationDomain {
  std::vector<char> active;   ///< per patch
  std::vector<double> coeff;  ///< per patch (ignored where inactive)

  static IntegrationDomain all(const MultipatchGeometry& g, double c = 1.0);
  static IntegrationDomain subdomain(const MultipatchGeometry& g, Subdomain s,
                                     double c = 1.0);
};

/// Mass matrix of S_p^k over the selected patches, quadrature with
/// `quad_points` Gauss points per direction (default degree+1).
SpMatD assemble_mass(const MultipatchGeometry& geom, const CubicalComplex& cx,
                     int form_degree, const IntegrationDomain& dom,
                     int quad_points = 0);

/// Stiffness via the incidence factorization: A0 = G^T M1 G, A1 = C^T M2 C.
SpMatD stiffness_from_mass(const CubicalComplex& cx, int which,
                           const SpMatD& mass);

/// Direct quadrature assembly of the grad-grad (which = 0) or curl-curl
/// (which = 1) matrix; the independent route used to validate the
/// factorization.
SpMatD assemble_stiffness_direct(const MultipatchGeometry& geom,
                                 const CubicalComplex& cx, int which,
                                 const IntegrationDomain& dom,
                                 int quad_points = 0);

/// Load vector over edge DoFs: integral of coeff * F(x) . (edge basis).
VecXd assemble_field_load(const MultipatchGeometry& geom, const CubicalComplex& cx,
                          const SourceField& field, const IntegrationDomain& dom,
                          int quad_points = 0);

/// Same integral for the source vector potential A_s instead of H_s.
VecXd assemble_potential_load(const MultipatchGeometry& geom,
                              const CubicalComplex& cx, const SourceField& field,
                              const IntegrationDomain& dom, int quad_points = 0);

/// Load vector over edge DoFs for an explicit current density J(x).
VecXd assemble_current_load(const MultipatchGeometry& geom, const CubicalComplex& cx,
                            const std::function<Vec3(const Vec3&)>& j,
                            const IntegrationDomain& dom, int quad_points = 0);

/// Matrix-free application of the edge mass: returns M^1 u for a coefficient
/// vector over all global edges, without forming M^1. Used for the coupling
/// columns against sparse generator fields on meshes where the full edge mass
/// would be large.
VecXd apply_edge_mass(const MultipatchGeometry& geom, const CubicalComplex& cx,
                      const VecXd& u, const IntegrationDomain& dom,
                      int quad_points = 0);

/// Load vector over vertex DoFs: integral of coeff * f(x) * (scalar basis).
VecXd assemble_scalar_load(const MultipatchGeometry& geom, const CubicalComplex& cx,
                           const std::function<double(const Vec3&)>& f,
                           const IntegrationDomain& dom, int quad_points = 0);

/// Partition of the conductor edge DoFs for the strongly-imposed interface
/// condition, plus the substitution operator expressing the eliminated
/// interface coefficients through the scalar potential and the harmonic
/// coefficients.
struct InterfaceCouplingPlan {
  std::vector<Index> conductor_edges;        ///< all edges touching the conductor
  std::vector<Index> interior_edges;         ///< unknowns of the vector field
  std::vector<Index> interface_edges;        ///< eliminated via the substitution
  std::vector<Index> phi_vertices;           ///< insulator scalar DoFs (no domain boundary)
  /// Trace operators on the interface-edge rows (all global edges x cols;
  /// rows off the interface are zero): gradient incidence restricted to the
  /// scalar DoFs, and the generator coefficients.
  SpMatD phi_part;  ///< edges x phi_vertices
  SpMatD gen_part;  ///< edges x generators
};

/// `generators` are spline coefficient vectors over global edge ids (pairs
/// sorted by id). Throws when a generator carries a coefficient on a domain
/// boundary edge (the constraint would conflict with the Dirichlet data).
InterfaceCouplingPlan interface_coupling(
    const CubicalComplex& cx,
    const std::vector<std::vector<std::pair<Index, double>>>& generators);

}  // namespace igacoh
