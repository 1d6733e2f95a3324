// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "igacoh/multipatch.hpp"

namespace igacoh {
namespace fixtures {

/// Affine box patch [lo, hi]; control points on the Greville lattice, which
/// reproduces the affine map exactly at any degree.
Patch box_patch(const std::string& name, const Vec3& lo, const Vec3& hi, int degree,
                int elems, Subdomain sub);

/// Unit cube [0,1]^3 (the identity map).
Patch identity_patch(int degree, int elems, Subdomain sub = Subdomain::insulator);

/// Smoothly distorted unit cube (polynomial map, detJ > 0), for curved-
/// geometry tests.
Patch curved_patch(int degree, int elems);

/// Quarter annulus r in [r_in, r_out], 90 degrees starting at `quarter`*90deg,
/// z in [z0, z1]; quadratic NURBS in the angular direction (exact circle).
Patch quarter_annulus_patch(const std::string& name, double r_in, double r_out,
                            double z0, double z1, int quarter, Subdomain sub);

MultipatchGeometry single_cube(int degree, int elems);
MultipatchGeometry two_patch_cube(int degree, int elems);

/// Four boxes forming a square annulus (a solid torus); all conductor.
MultipatchGeometry four_box_ring(int degree, int elems);

/// Square washer: a ring of 8 conductor patches (square annulus) inside an
/// insulator box; 5 x 5 x 3 patch grid, coordinates in meters.
MultipatchGeometry square_washer(int degree, int elems);

/// Full annulus of four rational quarter-annulus patches (geometry fixture).
MultipatchGeometry annulus_washer(int elems);

/// Hollow-cylinder washer: a conducting ring of four rational quarter-annulus
/// patches (r in [1,2] cm, height 1 cm) inside an insulator box of half-width
/// 8 cm, meshed as an O-grid (51 patches, 4 of them conductor). The circle is
/// exact at any degree via Bezier elevation of the quadratic arcs.
MultipatchGeometry cylinder_washer(int degree, int elems);

/// Plate with up to 8 holes in an insulator box; hole cells carry patch
/// names "hole1".."hole8". Geometry is independent of the hole count.
MultipatchGeometry plate_with_holes(int degree, int elems);

/// Subdomain labels for the plate with the first n_holes holes open
/// (remaining hole cells relabeled conductor). Material relabeling only.
std::vector<Subdomain> plate_labels(const MultipatchGeometry& plate, int n_holes);

/// Conductor at the bottom, insulator on top: contractible conductor.
MultipatchGeometry conductor_block(int degree, int elems);

}  // namespace fixtures
}  // namespace igacoh
