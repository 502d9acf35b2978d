#pragma once

// Second-order forward-mode automatic differentiation in three variables.
// A Jet carries a value together with its gradient and Hessian with respect
// to the evaluation point.

#include <cmath>

#include "paraclip/core_math.hpp"

namespace paraclip {

struct Jet {
  double v = 0.0;
  Vec3 g;
  Mat3 h;

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly
  Jet(double value, const Vec3& grad, const Mat3& hess) : v(value), g(grad), h(hess) {}

  /// The coordinate function x_i (value c, unit gradient, zero Hessian).
  static Jet variable(int i, double c) {
    Jet j(c);
    j.g[i] = 1.0;
    return j;
  }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    g += o.g;
    h += o.h;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    g -= o.g;
    h -= o.h;
    return *this;
  }
  Jet& operator*=(double s) {
    v *= s;
    g *= s;
    h *= s;
    return *this;
  }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator-(Jet a) { return a *= -1.0; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v * b.v;
  r.g = a.v * b.g + b.v * a.g;
  r.h = a.v * b.h + b.v * a.h + outer(a.g, b.g) + outer(b.g, a.g);
  return r;
}

/// f(u) given f(u.v), f'(u.v), f''(u.v).
inline Jet chain(const Jet& u, double f, double df, double d2f) {
  Jet r;
  r.v = f;
  r.g = df * u.g;
  r.h = df * u.h + d2f * outer(u.g, u.g);
  return r;
}

inline Jet reciprocal(const Jet& u) {
  const double inv = 1.0 / u.v;
  return chain(u, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
inline Jet operator/(Jet a, double s) { return a *= 1.0 / s; }

inline Jet sqrt(const Jet& u) {
  const double s = std::sqrt(u.v);
  return chain(u, s, 0.5 / s, -0.25 / (s * u.v));
}

}  // namespace paraclip
