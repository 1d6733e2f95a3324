// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#include "igacoh/sources.hpp"

#include <cmath>

namespace igacoh {

namespace {

struct LoopFrame {
  Vec3 c, u, v, n;  // center and orthonormal frame, n = axis
  double r, cur;
};

LoopFrame make_frame(const Vec3& center, const Vec3& axis, double radius,
                     double current) {
  LoopFrame f;
  f.c = center;
  f.n = axis.normalized();
  // any stable perpendicular
  Vec3 seed = (std::abs(f.n[0]) < 0.9) ? Vec3::UnitX() : Vec3::UnitY();
  f.u = (seed - seed.dot(f.n) * f.n).normalized();
  f.v = f.n.cross(f.u);
  f.r = radius;
  f.cur = current;
  return f;
}

/// Integrand of the Biot-Savart (mode 0) or vector-potential (mode 1) line
/// integral at loop angle t.
template <int Mode>
Vec3 loop_integrand(const LoopFrame& f, double t, const Vec3& x) {
  const double ct = std::cos(t), st = std::sin(t);
  const Vec3 pos = f.c + f.r * (ct * f.u + st * f.v);
  const Vec3 dl = f.r * (-st * f.u + ct * f.v);
  const Vec3 d = x - pos;
  const double dist = d.norm();
  if constexpr (Mode == 0) {
    return dl.cross(d) / (dist * dist * dist);
  } else {
    return dl / dist;
  }
}

template <int Mode>
Vec3 gauss7(const LoopFrame& f, double a, double b, const Vec3& x) {
  static const double xs[7] = {-0.949107912342759, -0.741531185599394,
                               -0.405845151377397, 0.0,
                               0.405845151377397,  0.741531185599394,
                               0.949107912342759};
  static const double ws[7] = {0.129484966168870, 0.279705391489277,
                               0.381830050505119, 0.417959183673469,
                               0.381830050505119, 0.279705391489277,
                               0.129484966168870};
  Vec3 acc = Vec3::Zero();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < 7; ++i)
    acc += ws[i] * loop_integrand<Mode>(f, mid + half * xs[i], x);
  return half * acc;
}

template <int Mode>
Vec3 adaptive(const LoopFrame& f, double a, double b, const Vec3& x,
              const Vec3& whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const Vec3 left = gauss7<Mode>(f, a, mid, x);
  const Vec3 right = gauss7<Mode>(f, mid, b, x);
  const Vec3 sum = left + right;
  if (depth >= 24 || (sum - whole).norm() <= tol) return sum;
  return adaptive<Mode>(f, a, mid, x, left, 0.5 * tol, depth + 1) +
         adaptive<Mode>(f, mid, b, x, right, 0.5 * tol, depth + 1);
}

template <int Mode>
Vec3 loop_integral(const LoopFrame& f, const Vec3& x, double rel_tol) {
  // Eight initial panels keep the adaptivity shallow for far-field points.
  Vec3 total = Vec3::Zero();
  Vec3 panels[8];
  double scale = 0.0;
  for (int k = 0; k < 8; ++k) {
    panels[k] = gauss7<Mode>(f, 2.0 * M_PI * k / 8.0, 2.0 * M_PI * (k + 1) / 8.0, x);
    scale += panels[k].norm();
  }
  const double tol = rel_tol * std::max(scale, 1e-300);
  for (int k = 0; k < 8; ++k)
    total += adaptive<Mode>(f, 2.0 * M_PI * k / 8.0, 2.0 * M_PI * (k + 1) / 8.0, x,
                            panels[k], tol / 8.0, 0);
  return total;
}

class UniformSource final : public SourceField {
 public:
  explicit UniformSource(const Vec3& h) : h_(h) {}
  // curl(0.5 * B x r) = B for constant B
  Vec3 H(const Vec3&) const override { return h_; }
  Vec3 A(const Vec3& x) const override { return 0.5 * kMu0 * h_.cross(x); }
  bool is_zero() const override { return h_.isZero(0.0); }

 private:
  Vec3 h_;
};

class CoilSource final : public SourceField {
 public:
  explicit CoilSource(const SourceSpec& s) {
    const double per_loop = s.current_total / s.coil_loops;
    const Vec3 n = s.coil_axis.normalized();
    for (int k = 0; k < s.coil_loops; ++k) {
      const double offset = (k - 0.5 * (s.coil_loops - 1)) * s.coil_spacing;
      loops_.push_back(make_frame(s.coil_center + offset * n, n, s.coil_radius,
                                  per_loop));
    }
  }
  Vec3 H(const Vec3& x) const override {
    Vec3 acc = Vec3::Zero();
    for (const LoopFrame& f : loops_)
      acc += f.cur / (4.0 * M_PI) * loop_integral<0>(f, x, 1e-10);
    return acc;
  }
  Vec3 A(const Vec3& x) const override {
    Vec3 acc = Vec3::Zero();
    for (const LoopFrame& f : loops_)
      acc += kMu0 * f.cur / (4.0 * M_PI) * loop_integral<1>(f, x, 1e-10);
    return acc;
  }

 private:
  std::vector<LoopFrame> loops_;
};

class ZeroSource final : public SourceField {
 public:
  Vec3 H(const Vec3&) const override { return Vec3::Zero(); }
  Vec3 A(const Vec3&) const override { return Vec3::Zero(); }
  bool is_zero() const override { return true; }
};

class CallbackSource final : public SourceField {
 public:
  explicit CallbackSource(std::function<Vec3(const Vec3&)> f) : f_(std::move(f)) {}
  Vec3 H(const Vec3& x) const override { return f_(x); }
  Vec3 A(const Vec3&) const override {
    throw ArgumentError("callback sources provide no vector potential");
  }
  bool has_potential() const override { return false; }

 private:
  std::function<Vec3(const Vec3&)> f_;
};

}  // namespace

std::unique_ptr<SourceField> make_source(const SourceSpec& spec) {
  switch (spec.kind) {
    case SourceSpec::Kind::none: return std::make_unique<ZeroSource>();
    case SourceSpec::Kind::uniform: return std::make_unique<UniformSource>(spec.uniform_h);
    case SourceSpec::Kind::coil:
      if (spec.coil_loops < 1 || spec.coil_radius <= 0.0)
        throw ArgumentError("coil source needs a positive radius and loop count");
      return std::make_unique<CoilSource>(spec);
    case SourceSpec::Kind::callback:
      if (!spec.callback) throw ArgumentError("callback source without callable");
      return std::make_unique<CallbackSource>(spec.callback);
  }
  throw ArgumentError("unknown source kind");
}

Vec3 loop_biot_savart(const Vec3& center, const Vec3& axis, double radius,
                      double current, const Vec3& x, double rel_tol) {
  const LoopFrame f = make_frame(center, axis, radius, current);
  return current / (4.0 * M_PI) * loop_integral<0>(f, x, rel_tol);
}

Vec3 loop_vector_potential(const Vec3& center, const Vec3& axis, double radius,
                           double current, const Vec3& x, double rel_tol) {
  const LoopFrame f = make_frame(center, axis, radius, current);
  return kMu0 * current / (4.0 * M_PI) * loop_integral<1>(f, x, rel_tol);
}

}  // namespace igacoh
