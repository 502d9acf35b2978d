#pragma once

// Small fixed-size linear algebra, scalar root finding and Gauss-Legendre
// rules shared by every other part of the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paraclip/errors.hpp"

namespace paraclip {

// ---------------------------------------------------------------------------
// Vectors and matrices
// ---------------------------------------------------------------------------

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr double& operator[](int i) { return i == 0 ? x : y; }
  constexpr double operator[](int i) const { return i == 0 ? x : y; }

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
/// z-component of the planar cross product.
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) { return a / norm(a); }

struct Mat2 {
  std::array<std::array<double, 2>, 2> m{};

  constexpr double& operator()(int i, int j) { return m[i][j]; }
  constexpr double operator()(int i, int j) const { return m[i][j]; }

  static constexpr Mat2 identity() { return Mat2{{{{1.0, 0.0}, {0.0, 1.0}}}}; }
  constexpr Mat2 transposed() const { return Mat2{{{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}}}; }
  constexpr double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
};

constexpr Vec2 operator*(const Mat2& a, const Vec2& v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y, a(1, 0) * v.x + a(1, 1) * v.y};
}
constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
  return r;
}

struct Mat3 {
  std::array<std::array<double, 3>, 3> m{};

  constexpr double& operator()(int i, int j) { return m[i][j]; }
  constexpr double operator()(int i, int j) const { return m[i][j]; }

  static constexpr Mat3 identity() {
    Mat3 r;
    r(0, 0) = r(1, 1) = r(2, 2) = 1.0;
    return r;
  }
  static constexpr Mat3 diagonal(double a, double b, double c) {
    Mat3 r;
    r(0, 0) = a;
    r(1, 1) = b;
    r(2, 2) = c;
    return r;
  }
  /// Matrix whose columns are the given vectors.
  static constexpr Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
      r(i, 0) = c0[i];
      r(i, 1) = c1[i];
      r(i, 2) = c2[i];
    }
    return r;
  }
  constexpr Vec3 column(int j) const { return {m[0][j], m[1][j], m[2][j]}; }
  constexpr Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = m[j][i];
    return r;
  }
  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& row : m)
      for (double v : row) s += v * v;
    return std::sqrt(s);
  }

  constexpr Mat3& operator+=(const Mat3& o) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] += o.m[i][j];
    return *this;
  }
  constexpr Mat3& operator-=(const Mat3& o) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] -= o.m[i][j];
    return *this;
  }
  constexpr Mat3& operator*=(double s) {
    for (auto& row : m)
      for (double& v : row) v *= s;
    return *this;
  }
};

constexpr Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
constexpr Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
constexpr Mat3 operator*(double s, Mat3 a) { return a *= s; }
constexpr Mat3 operator*(Mat3 a, double s) { return a *= s; }
constexpr Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}
constexpr Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
  return r;
}
constexpr Mat3 outer(const Vec3& a, const Vec3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
  return r;
}
/// a^T M b
constexpr double quadratic_form(const Vec3& a, const Mat3& mat, const Vec3& b) { return dot(a, mat * b); }

// ---------------------------------------------------------------------------
// Summation
// ---------------------------------------------------------------------------

/// Neumaier-compensated accumulator; the result depends only on the order of
/// the added terms.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      carry_ += (sum_ - t) + v;
    else
      carry_ += (v - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) {
    add(v);
    return *this;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Up to two real roots in ascending order.
struct QuadraticRoots {
  std::array<double, 2> values{};
  int count = 0;

  const double* begin() const { return values.data(); }
  const double* end() const { return values.data() + count; }
  std::size_t size() const { return static_cast<std::size_t>(count); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Real roots of c2*x^2 + c1*x + c0. The larger-magnitude root comes from the
/// sign-aware discriminant form, the other from the product c0/(c2*r1).
/// A double root is reported once.
inline QuadraticRoots solve_quadratic(double c2, double c1, double c0) {
  QuadraticRoots out;
  if (c2 == 0.0) {
    if (c1 == 0.0) {
      if (c0 == 0.0) throw NumericalError("degenerate identity equation");
      return out;
    }
    out.values[0] = -c0 / c1;
    out.count = 1;
    return out;
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return out;
  if (disc == 0.0) {
    out.values[0] = -c1 / (2.0 * c2);
    out.count = 1;
    return out;
  }
  const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
  double r1 = q / c2;
  double r2 = (q != 0.0) ? c0 / q : -r1;
  if (r1 > r2) std::swap(r1, r2);
  out.values = {r1, r2};
  out.count = 2;
  return out;
}

/// Safeguarded Newton iteration on a bracket [lo, hi] with f(lo)*f(hi) < 0.
/// `f` returns the pair (value, derivative). A Newton step that leaves the
/// current bracket is replaced by bisection. Converges when |f| <= tol or when
/// the bracket has collapsed to adjacent floating-point numbers.
template <class F>
double newton_root(F&& f, double lo, double hi, double tol, std::optional<double> start = std::nullopt) {
  if (lo > hi) std::swap(lo, hi);
  double flo = f(lo).first;
  double fhi = f(hi).first;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw NumericalError("no bracketed root");

  double x = start.value_or(0.5 * (lo + hi));
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  double best_x = x;
  double best_f = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    const auto [fx, dfx] = f(x);
    if (std::abs(fx) < best_f) {
      best_f = std::abs(fx);
      best_x = x;
    }
    if (std::abs(fx) <= tol) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)) ||
        hi <= std::nextafter(lo, hi))
      return best_x;
    double next = (dfx != 0.0) ? x - fx / dfx : lo - 1.0;
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    } else if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x) ||
               next == x) {
      // Newton has stagnated at rounding level.
      return std::abs(fx) <= best_f ? x : best_x;
    }
    x = next;
  }
  throw NumericalError("root iteration stalled");
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureRule {
  int order = 0;
  std::vector<double> nodes;    ///< ascending, in (-1, 1)
  std::vector<double> weights;  ///< positive, summing to 2
};

namespace detail {

inline QuadratureRule build_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.order = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-16) break;
    }
    // One last derivative evaluation at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace detail

inline constexpr int kMaxQuadratureOrder = 64;

/// n-point Gauss-Legendre rule on [-1, 1], 1 <= n <= 64. Rules are built once
/// and shared.
inline const QuadratureRule& gauss_legendre(int n) {
  if (n < 1 || n > kMaxQuadratureOrder)
    throw ParameterError("gauss_legendre: order " + std::to_string(n) + " outside [1, 64]");
  static const std::vector<QuadratureRule> rules = [] {
    std::vector<QuadratureRule> r;
    r.reserve(kMaxQuadratureOrder);
    for (int k = 1; k <= kMaxQuadratureOrder; ++k) r.push_back(detail::build_gauss_legendre(k));
    return r;
  }();
  return rules[static_cast<std::size_t>(n - 1)];
}

// ---------------------------------------------------------------------------
// Symmetric eigenproblems
// ---------------------------------------------------------------------------

struct SymmetricEigen3 {
  std::array<double, 3> values{};  ///< descending
  Mat3 vectors;                    ///< column i belongs to values[i]
};

/// Cyclic Jacobi eigen-decomposition of a symmetric 3x3 matrix.
inline SymmetricEigen3 symmetric_eigen_3x3(const Mat3& input) {
  const double scale = input.frobenius_norm();
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (std::abs(input(i, j) - input(j, i)) > 1e-12 * std::max(scale, 1e-300))
        throw ParameterError("symmetric_eigen_3x3: matrix is not symmetric");

  Mat3 a = input;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) a(i, j) = a(j, i) = 0.5 * (input(i, j) + input(j, i));
  Mat3 v = Mat3::identity();

  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (off <= 1e-34 * std::max(scale * scale, 1e-300)) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });
  SymmetricEigen3 out;
  for (int k = 0; k < 3; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (int i = 0; i < 3; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

struct SymmetricEigen2 {
  std::array<double, 2> values{};  ///< descending
  Vec2 first;                      ///< unit eigenvector of values[0]
  Vec2 second;                     ///< unit eigenvector of values[1], cross(first, second) = +1
};

/// Closed-form eigen-decomposition of [[a, b], [b, c]]. The first eigenvector
/// is (cos psi, sin psi) with tan(2 psi) = 2b / (a - c), psi = 0 when the
/// matrix is a multiple of the identity.
inline SymmetricEigen2 symmetric_eigen_2x2(double a, double b, double c) {
  const double psi = 0.5 * std::atan2(2.0 * b, a - c);
  const double cs = std::cos(psi);
  const double sn = std::sin(psi);
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  SymmetricEigen2 out;
  out.values = {mean + radius, mean - radius};
  out.first = {cs, sn};
  out.second = {-sn, cs};
  return out;
}

// ---------------------------------------------------------------------------
// Plane fitting
// ---------------------------------------------------------------------------

struct PlaneFit {
  Vec3 centroid;
  Vec3 normal;  ///< unit; sign is arbitrary
};

/// Least-squares plane through a point cloud: the normal is the eigenvector of
/// the smallest eigenvalue of Y Y^T (Y = points minus centroid), which equals
/// the left singular vector of the smallest singular value of Y.
inline PlaneFit plane_fit(std::span<const Vec3> points) {
  if (points.size() < 3) throw NumericalError("degenerate point cloud");
  Vec3 c;
  for (const Vec3& p : points) c += p;
  c = c / static_cast<double>(points.size());
  Mat3 gram;
  for (const Vec3& p : points) gram += outer(p - c, p - c);
  const SymmetricEigen3 eig = symmetric_eigen_3x3(gram);
  if (!(eig.values[0] > 0.0) || eig.values[1] <= 1e-24 * eig.values[0])
    throw NumericalError("degenerate point cloud");
  return {c, normalized(eig.vectors.column(2))};
}

}  // namespace paraclip
