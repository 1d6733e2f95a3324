// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "igacoh/patch.hpp"

namespace igacoh {

/// Explicit face identification, overriding coordinate auto-detection.
/// Faces are numbered 2*direction + side (side 0 at parameter 0).
struct InterfaceSpec {
  Index patch_a = 0;
  int face_a = 0;
  Index patch_b = 0;
  int face_b = 0;
};

/// A conforming collection of patches. Every patch lies entirely in the
/// conductor or entirely in the insulator.
struct MultipatchGeometry {
  std::vector<Patch> patches;
  std::vector<InterfaceSpec> interfaces;  ///< empty: auto-detect by coordinates

  Index find_patch(const std::string& name) const;
};

}  // namespace igacoh
