// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>

#include "igacoh/types.hpp"

namespace igacoh {

constexpr double kMu0 = 1.25663706143591729539e-6;  // 4*pi*1e-7

/// Serializable source descriptor. The coil is a stack of circular filament
/// loops carrying current_total / n_loops each; `callback` is an in-process
/// hook for tabulated fields (not serializable).
struct SourceSpec {
  enum class Kind { none, uniform, coil, callback } kind = Kind::none;
  Vec3 uniform_h = Vec3::Zero();          // A/m
  Vec3 coil_center = Vec3::Zero();
  Vec3 coil_axis = Vec3::UnitZ();
  double coil_radius = 0.0;               // m
  int coil_loops = 1;
  double coil_spacing = 0.0;              // m between loops along the axis
  double current_total = 0.0;             // ampere-turns
  std::function<Vec3(const Vec3&)> callback;  // H_s(x)
};

/// Evaluable impressed source: magnetic field H_s with curl H_s = J_s, and
/// (for filament sources) the Coulomb-gauge vector potential A_s with
/// curl A_s = mu0 H_s.
class SourceField {
 public:
  virtual ~SourceField() = default;
  virtual Vec3 H(const Vec3& x) const = 0;
  virtual Vec3 A(const Vec3& x) const = 0;
  virtual bool is_zero() const { return false; }
  /// True when A() is available (uniform and coil sources).
  virtual bool has_potential() const { return true; }
};

std::unique_ptr<SourceField> make_source(const SourceSpec& spec);

/// Biot-Savart field of a single circular filament loop, via adaptive Gauss
/// quadrature along the loop. Exposed for testing against over-integration.
Vec3 loop_biot_savart(const Vec3& center, const Vec3& axis, double radius,
                      double current, const Vec3& x, double rel_tol = 1e-10);

/// Line-integral vector potential of the same loop (A = mu0 I / 4pi * int dl/r).
Vec3 loop_vector_potential(const Vec3& center, const Vec3& axis, double radius,
                           double current, const Vec3& x, double rel_tol = 1e-10);

}  // namespace igacoh
