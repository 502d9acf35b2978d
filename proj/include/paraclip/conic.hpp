#pragma once

// The curve where a paraboloid meets the plane of a polyhedron face.
//
// With face coordinates x = x1 + mu u (mu orthonormal, mu2 = n_f x mu1) the
// negated paraboloid level set restricted to the plane is the quadratic
//   q(u) = u^T A u + a.u + a = -lambda(x1 + mu u),
// positive on the interior side. Rotating by R = [r1 r2] and shifting by u0,
// u = u0 + R w, brings q into one of the principal forms below; each comes
// with an explicit parametrization w(s) of the zero set.
//
//   Elliptic       B1 w1^2 + B2 w2^2 + b       w = (p cos s, q sin s)
//   Hyperbolic     B1 w1^2 + B2 w2^2 + b       w = (br p cosh s, q sinh s)
//   Parabolic      B1 w1^2 + b1 w1 + b2 w2     w = (s, -(b1 s + B1 s^2) / b2)
//   ParallelLines  B1 w1^2 + b                 w = (br p, s)
//   Linear         a.u + a                     u = u0 + s e,  e = (a2, -a1)/|a|
//
// For the hyperbola the axes are arranged so that w1 is the transverse axis
// (sign(B1) = -sign(b)); br = +-1 selects the branch.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "paraclip/core_math.hpp"
#include "paraclip/frame.hpp"

namespace paraclip {

enum class ConicClass { Elliptic, Hyperbolic, Parabolic, ParallelLines, Linear, Empty };

inline constexpr int kConicClassCount = 6;

inline const char* to_string(ConicClass c) {
  switch (c) {
    case ConicClass::Elliptic: return "elliptic";
    case ConicClass::Hyperbolic: return "hyperbolic";
    case ConicClass::Parabolic: return "parabolic";
    case ConicClass::ParallelLines: return "parallel_lines";
    case ConicClass::Linear: return "linear";
    case ConicClass::Empty: return "empty";
  }
  return "?";
}

/// Orthonormal in-plane basis of a face and its unit outward normal.
struct FaceFrame {
  Vec3 origin;  ///< first face vertex x_{k,1}
  Vec3 normal;
  Vec3 mu1;
  Vec3 mu2;

  Vec2 to_face(const Vec3& x) const {
    const Vec3 d = x - origin;
    return {dot(d, mu1), dot(d, mu2)};
  }
  Vec3 to_space(const Vec2& u) const { return origin + u.x * mu1 + u.y * mu2; }
};

struct FaceConic {
  ConicClass cls = ConicClass::Empty;
  // Raw coefficients in face coordinates.
  Mat2 A;
  Vec2 avec;
  double a = 0.0;
  // Principal form (working axes, see header comment).
  double psi = 0.0;  ///< angle of the eigenvector of the larger eigenvalue of A
  Vec2 r1{1.0, 0.0};
  Vec2 r2{0.0, 1.0};
  Vec2 u0;
  double B1 = 0.0;
  double B2 = 0.0;
  double b = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double p = 0.0;
  double q = 0.0;
  Vec2 e;  ///< linear class direction
  /// +1 when the conic centre (or the focus side of a parabola) is exterior.
  int chi = 0;
  /// Real curve exists (false for imaginary ellipses and empty parallel pairs).
  bool real = false;

  double value(const Vec2& u) const { return dot(u, A * u) + dot(avec, u) + a; }
  Vec2 gradient(const Vec2& u) const { return 2.0 * (A * u) + avec; }

  /// Principal coordinates of a face point.
  Vec2 to_working(const Vec2& u) const {
    const Vec2 d = u - u0;
    return {dot(d, r1), dot(d, r2)};
  }
  /// Principal coordinates of a displacement between face points.
  Vec2 displacement_to_working(const Vec2& du) const { return {dot(du, r1), dot(du, r2)}; }
  Vec2 from_working(const Vec2& w) const { return u0 + w.x * r1 + w.y * r2; }

  int component_count() const {
    switch (cls) {
      case ConicClass::Hyperbolic:
      case ConicClass::ParallelLines: return 2;
      case ConicClass::Empty: return 0;
      default: return 1;
    }
  }

  /// Component index of a face point on the curve (branch -1 -> 0, +1 -> 1).
  int component(const Vec2& u) const {
    if (cls == ConicClass::Hyperbolic || cls == ConicClass::ParallelLines) return to_working(u).x < 0.0 ? 0 : 1;
    return 0;
  }
  static double branch_sign(int component) { return component == 0 ? -1.0 : 1.0; }

  /// Curve parameter of a face point on the curve.
  double parameter(const Vec2& u) const {
    switch (cls) {
      case ConicClass::Elliptic: {
        const Vec2 w = to_working(u);
        return std::atan2(w.y / q, w.x / p);
      }
      case ConicClass::Hyperbolic: return std::asinh(to_working(u).y / q);
      case ConicClass::Parabolic: return dot(u, r1);  // u0 is along r2
      case ConicClass::ParallelLines: return dot(u, r2);  // u0 is along r1
      case ConicClass::Linear: return dot(u, e);  // u0 is along avec
      case ConicClass::Empty: break;
    }
    return 0.0;
  }

  /// Working-axis position at parameter s on a component.
  Vec2 working_point(int comp, double s) const {
    const double br = branch_sign(comp);
    switch (cls) {
      case ConicClass::Elliptic: return {p * std::cos(s), q * std::sin(s)};
      case ConicClass::Hyperbolic: return {br * p * std::cosh(s), q * std::sinh(s)};
      case ConicClass::Parabolic: return {s, -(b1 * s + B1 * s * s) / b2};
      case ConicClass::ParallelLines: return {br * p, s};
      default: break;
    }
    return {};
  }

  /// Face point at parameter s on a component.
  Vec2 point(int comp, double s) const {
    if (cls == ConicClass::Linear) return u0 + s * e;
    return from_working(working_point(comp, s));
  }

  /// +1 when increasing s keeps the interior (q >= 0) on the left of the
  /// curve, -1 otherwise.
  double direction(int comp) const {
    const double br = branch_sign(comp);
    switch (cls) {
      case ConicClass::Elliptic: return B1 > 0.0 ? -1.0 : 1.0;
      case ConicClass::Hyperbolic: return br * (b > 0.0 ? 1.0 : -1.0);
      case ConicClass::Parabolic: return b2 > 0.0 ? 1.0 : -1.0;
      case ConicClass::ParallelLines: return -br * (B1 > 0.0 ? 1.0 : -1.0);
      case ConicClass::Linear: return 1.0;
      case ConicClass::Empty: break;
    }
    return 1.0;
  }
};

/// Quadratic form of the folded paraboloid on a face plane, classified.
/// Eigenvalues of A below 1e-12 * |K| (K the curvature matrix) count as zero.
inline FaceConic classify_face(const ParaboloidFrame& f, const FaceFrame& face) {
  FaceConic c;
  // Half curvature matrix Kh: lambda = <x - base, n0> - t^T Kh t.
  const double k11 = 0.5 * f.kappa1, k12 = 0.5 * f.kappa12, k22 = 0.5 * f.kappa2;
  const double kscale = std::sqrt(k11 * k11 + 2.0 * k12 * k12 + k22 * k22);
  // T = tau^T mu
  const double t11 = dot(f.tau1, face.mu1), t12 = dot(f.tau1, face.mu2);
  const double t21 = dot(f.tau2, face.mu1), t22 = dot(f.tau2, face.mu2);
  const Vec3 d = face.origin - f.base;
  const Vec2 td{dot(d, f.tau1), dot(d, f.tau2)};
  auto kh = [&](const Vec2& v) { return Vec2{k11 * v.x + k12 * v.y, k12 * v.x + k22 * v.y}; };
  // Columns of T.
  const Vec2 c1{t11, t21}, c2{t12, t22};
  const Vec2 khc1 = kh(c1), khc2 = kh(c2);
  c.A(0, 0) = dot(c1, khc1);
  c.A(0, 1) = c.A(1, 0) = 0.5 * (dot(c1, khc2) + dot(c2, khc1));
  c.A(1, 1) = dot(c2, khc2);
  const Vec2 khtd = kh(td);
  c.avec = {2.0 * dot(c1, khtd) - dot(face.mu1, f.n0), 2.0 * dot(c2, khtd) - dot(face.mu2, f.n0)};
  c.a = dot(td, khtd) - dot(d, f.n0);

  const SymmetricEigen2 eig = symmetric_eigen_2x2(c.A(0, 0), c.A(0, 1), c.A(1, 1));
  c.psi = std::atan2(eig.first.y, eig.first.x);
  c.r1 = eig.first;
  c.r2 = eig.second;
  double B1 = eig.values[0], B2 = eig.values[1];
  const double zero = 1e-12 * kscale;
  const bool z1 = std::abs(B1) <= zero, z2 = std::abs(B2) <= zero;
  const double anorm = norm(c.avec);

  // Quarter turn of the working axes: (r1, r2) -> (r2, -r1), swapping B1, B2.
  auto quarter_turn = [&] {
    const Vec2 t = c.r1;
    c.r1 = c.r2;
    c.r2 = -t;
    std::swap(B1, B2);
  };

  if (!z1 && !z2) {
    const double a1 = dot(c.avec, c.r1), a2 = dot(c.avec, c.r2);
    const double w1 = -a1 / (2.0 * B1), w2 = -a2 / (2.0 * B2);
    c.u0 = w1 * c.r1 + w2 * c.r2;
    c.b = c.a + 0.5 * (a1 * w1 + a2 * w2);
    if ((B1 > 0.0) == (B2 > 0.0)) {
      c.cls = ConicClass::Elliptic;
      c.B1 = B1;
      c.B2 = B2;
      c.real = (-c.b / B1) > 0.0;
      if (c.real) {
        c.p = std::sqrt(-c.b / B1);
        c.q = std::sqrt(-c.b / B2);
      }
    } else {
      c.cls = ConicClass::Hyperbolic;
      if (c.b == 0.0) c.b = -1e-300;  // crossing line pair: nudge onto a hyperbola
      if ((B1 > 0.0) == (c.b > 0.0)) quarter_turn();
      c.B1 = B1;
      c.B2 = B2;
      c.p = std::sqrt(-c.b / B1);
      c.q = std::sqrt(c.b / B2);
      c.real = true;
    }
    c.chi = c.b < 0.0 ? 1 : -1;
  } else if (z1 != z2) {
    if (z1) quarter_turn();  // nonzero eigenvalue on the first working axis
    c.B1 = B1;
    c.B2 = 0.0;
    c.b1 = dot(c.avec, c.r1);
    c.b2 = dot(c.avec, c.r2);
    if (std::abs(c.b2) <= 1e-12 * anorm || anorm == 0.0) {
      c.cls = ConicClass::ParallelLines;
      const double w1 = -c.b1 / (2.0 * B1);
      c.u0 = w1 * c.r1;
      c.b = c.a + 0.5 * c.b1 * w1;
      c.b2 = 0.0;
      c.real = (-c.b / B1) > 0.0;
      if (c.real) c.p = std::sqrt(-c.b / B1);
      c.chi = c.b < 0.0 ? 1 : -1;
    } else {
      c.cls = ConicClass::Parabolic;
      c.u0 = (-c.a / c.b2) * c.r2;
      c.real = true;
      c.chi = B1 > 0.0 ? -1 : 1;
    }
  } else if (anorm > 0.0) {
    c.cls = ConicClass::Linear;
    c.B1 = c.B2 = 0.0;
    c.u0 = (-c.a / (anorm * anorm)) * c.avec;
    c.e = Vec2{c.avec.y, -c.avec.x} / anorm;
    c.real = true;
    c.chi = 0;
  } else {
    c.cls = ConicClass::Empty;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Cap areas: signed area between an arc (parameter s0 -> s0 + delta) and its
// chord, positive when the arc runs counter-clockwise about the chord.
// ---------------------------------------------------------------------------

namespace detail {

// sum_{k>=1} (+-1)^k x^(2k+1) / (2k+1)! for |x| < 1, Horner in x^2; the
// omitted terms are below 1e-17 relative.
inline double odd_series_tail(double x, double sign) {
  const double x2 = x * x;
  double t = 0.0;
  for (int k = 10; k >= 1; --k) t = x2 * (1.0 + sign * t) / ((2.0 * k) * (2.0 * k + 1.0));
  return sign * x * t;
}

}  // namespace detail

/// x - sin(x) without cancellation for small |x|.
inline double x_minus_sin(double x) {
  if (std::abs(x) < 1.0) return -detail::odd_series_tail(x, -1.0);
  return x - std::sin(x);
}

/// x - sinh(x) without cancellation for small |x|.
inline double x_minus_sinh(double x) {
  if (std::abs(x) < 1.0) return -detail::odd_series_tail(x, 1.0);
  return x - std::sinh(x);
}

inline double elliptic_cap(double p, double q, double delta) { return 0.5 * p * q * x_minus_sin(delta); }

inline double hyperbolic_cap(double p, double q, double branch, double delta) {
  return branch * 0.5 * p * q * x_minus_sinh(delta);
}

inline double parabolic_cap(double B1, double b2, double delta) { return -B1 / (6.0 * b2) * delta * delta * delta; }

}  // namespace paraclip
