#pragma once

// Local paraboloid description: a base point, an orthonormal right-handed
// frame (tau1, tau2, n0) and the height function
//   h(t) = (kappa1 t1^2 + 2 kappa12 t1 t2 + kappa2 t2^2) / 2
// over the tangent coordinates t = tau^T (x - base). The implicit form is
//   lambda(x) = <x - base, n0> - h(t) - shift,
// negative below the graph.

#include <cmath>

#include "paraclip/core_math.hpp"
#include "paraclip/errors.hpp"

namespace paraclip {

struct ParaboloidFrame {
  Vec3 base;
  Vec3 n0{0.0, 0.0, 1.0};
  Vec3 tau1{1.0, 0.0, 0.0};
  Vec3 tau2{0.0, 1.0, 0.0};
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa12 = 0.0;
  double shift = 0.0;

  /// Frame from a normal and first tangent; tau2 = n0 x tau1. Both inputs are
  /// normalized, tau1 is re-orthogonalized against n0.
  static ParaboloidFrame from_normal_tangent(const Vec3& base, const Vec3& normal, const Vec3& tangent,
                                             double k1, double k2, double s = 0.0) {
    const double nn = norm(normal);
    if (!(nn > 0.0)) throw ParameterError("paraboloid frame: zero normal");
    ParaboloidFrame f;
    f.base = base;
    f.n0 = normal / nn;
    Vec3 t = tangent - dot(tangent, f.n0) * f.n0;
    const double tn = norm(t);
    if (!(tn > 1e-12 * norm(tangent))) throw ParameterError("paraboloid frame: tangent parallel to normal");
    f.tau1 = t / tn;
    f.tau2 = cross(f.n0, f.tau1);
    f.kappa1 = k1;
    f.kappa2 = k2;
    f.shift = s;
    return f;
  }

  Vec2 tangent_coords(const Vec3& x) const {
    const Vec3 d = x - base;
    return {dot(d, tau1), dot(d, tau2)};
  }

  double height(const Vec2& t) const {
    return 0.5 * (kappa1 * t.x * t.x + 2.0 * kappa12 * t.x * t.y + kappa2 * t.y * t.y);
  }

  double value(const Vec3& x) const { return dot(x - base, n0) - height(tangent_coords(x)) - shift; }

  Vec3 gradient(const Vec3& x) const {
    const Vec2 t = tangent_coords(x);
    const double h1 = kappa1 * t.x + kappa12 * t.y;
    const double h2 = kappa12 * t.x + kappa2 * t.y;
    return n0 - h1 * tau1 - h2 * tau2;
  }

  Mat3 hessian() const {
    return -1.0 * (kappa1 * outer(tau1, tau1) + kappa12 * (outer(tau1, tau2) + outer(tau2, tau1)) +
                   kappa2 * outer(tau2, tau2));
  }

  /// Point on the graph above tangent coordinates t.
  Vec3 graph_point(const Vec2& t) const { return base + t.x * tau1 + t.y * tau2 + (height(t) + shift) * n0; }

  /// Same surface with the shift absorbed into the base point.
  ParaboloidFrame folded() const {
    ParaboloidFrame f = *this;
    f.base = base + shift * n0;
    f.shift = 0.0;
    return f;
  }

  /// Frame whose level set is -lambda: n0 and tau2 flip, diagonal curvatures
  /// change sign, the mixed term is unchanged in the flipped tangent basis.
  ParaboloidFrame complement() const {
    ParaboloidFrame f = folded();
    f.n0 = -f.n0;
    f.tau2 = -f.tau2;
    f.kappa1 = -kappa1;
    f.kappa2 = -kappa2;
    f.kappa12 = kappa12;
    return f;
  }

  /// Same frame with all curvatures set to zero (tangent plane).
  ParaboloidFrame linearized() const {
    ParaboloidFrame f = *this;
    f.kappa1 = f.kappa2 = f.kappa12 = 0.0;
    return f;
  }

  /// Largest deviation of (tau1, tau2, n0) from a right-handed orthonormal set.
  double orthonormality_defect() const {
    double e = 0.0;
    e = std::max(e, std::abs(dot(tau1, tau1) - 1.0));
    e = std::max(e, std::abs(dot(tau2, tau2) - 1.0));
    e = std::max(e, std::abs(dot(n0, n0) - 1.0));
    e = std::max(e, std::abs(dot(tau1, tau2)));
    e = std::max(e, std::abs(dot(tau1, n0)));
    e = std::max(e, std::abs(dot(tau2, n0)));
    e = std::max(e, norm(cross(tau1, tau2) - n0));
    return e;
  }
};

}  // namespace paraclip
