#pragma once

// Osculating paraboloid of a level-set surface inside one cell: edge roots,
// averaged and projected base point, principal frame from the shape operator.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "paraclip/core_math.hpp"
#include "paraclip/errors.hpp"
#include "paraclip/frame.hpp"
#include "paraclip/levelset.hpp"
#include "paraclip/mesh.hpp"

namespace paraclip {

enum class CellStatus { Interior, Exterior, Intersected };

inline const char* to_string(CellStatus s) {
  switch (s) {
    case CellStatus::Interior: return "interior";
    case CellStatus::Exterior: return "exterior";
    case CellStatus::Intersected: return "intersected";
  }
  return "?";
}

/// Vertex values with exact zeros moved to the interior side by
/// 1e-14 * diameter * |grad|.
inline std::vector<double> cell_vertex_values(const Polyhedron& cell, const LevelSetField& field) {
  std::vector<double> v(cell.vertices.size());
  double diam = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = field.value(cell.vertices[i]);
    if (v[i] == 0.0) {
      if (diam < 0.0) diam = cell.diameter();
      const double g = norm(field.gradient(cell.vertices[i]));
      v[i] = -1e-14 * diam * std::max(g, std::numeric_limits<double>::min());
    }
  }
  return v;
}

inline CellStatus classify_values(std::span<const double> values) {
  bool any_in = false, any_out = false;
  for (double v : values) (v < 0.0 ? any_in : any_out) = true;
  if (any_in && any_out) return CellStatus::Intersected;
  return any_in ? CellStatus::Interior : CellStatus::Exterior;
}

inline CellStatus classify_cell(const Polyhedron& cell, const LevelSetField& field) {
  return classify_values(cell_vertex_values(cell, field));
}

/// Root of the field on the segment p0 -> p1 (values f0, f1 of opposite sign,
/// gradients g0, g1). A cubic Hermite interpolant of the endpoint data gives
/// the starting guess for a safeguarded Newton iteration on the true field.
/// A missing gradient (the field is singular at that vertex) is replaced by
/// the chord slope.
inline Vec3 edge_surface_root(const Vec3& p0, const Vec3& p1, double f0, double f1, const std::optional<Vec3>& g0,
                              const std::optional<Vec3>& g1, const LevelSetField& field) {
  if (!((f0 < 0.0) != (f1 < 0.0))) throw ParameterError("edge_surface_root: no sign change on edge");
  const Vec3 d = p1 - p0;
  const double chord = f1 - f0;
  const double m0 = g0 ? dot(*g0, d) : chord;
  const double m1 = g1 ? dot(*g1, d) : chord;
  // Hermite cubic in monomial form.
  const double c0 = f0, c1 = m0;
  const double c2 = 3.0 * (f1 - f0) - 2.0 * m0 - m1;
  const double c3 = 2.0 * (f0 - f1) + m0 + m1;
  auto cubic = [&](double v) {
    return std::pair{((c3 * v + c2) * v + c1) * v + c0, (3.0 * c3 * v + 2.0 * c2) * v + c1};
  };
  const double scale = std::max(std::abs(f0), std::abs(f1));
  const double guess = newton_root(cubic, 0.0, 1.0, 1e-15 * scale);

  auto exact = [&](double v) {
    // The endpoints are never resampled.
    if (v == 0.0) return std::pair{f0, m0};
    if (v == 1.0) return std::pair{f1, m1};
    const FieldSample s = field.sample(p0 + v * d);
    return std::pair{s.value, dot(s.gradient, d)};
  };
  const double v = newton_root(exact, 0.0, 1.0, 1e-15 * scale, guess);
  return p0 + v * d;
}

/// Roots on every sign-change edge of the cell. Edges are evaluated from the
/// lexicographically smaller endpoint so neighbouring cells agree bitwise.
inline std::vector<Vec3> cell_surface_roots(const Polyhedron& cell, std::span<const double> values,
                                            const LevelSetField& field) {
  std::vector<Vec3> roots;
  std::vector<std::optional<Vec3>> grads(cell.vertices.size());
  std::vector<char> tried(cell.vertices.size(), 0);
  auto grad = [&](int i) -> const std::optional<Vec3>& {
    const auto k = static_cast<std::size_t>(i);
    if (!tried[k]) {
      tried[k] = 1;
      try {
        grads[k] = field.gradient(cell.vertices[k]);
      } catch (const NumericalError&) {
      }
    }
    return grads[k];
  };
  auto lex_less = [](const Vec3& a, const Vec3& b) {
    return a.x != b.x ? a.x < b.x : (a.y != b.y ? a.y < b.y : a.z < b.z);
  };
  for (auto [a, b] : cell.edges()) {
    const double fa = values[static_cast<std::size_t>(a)];
    const double fb = values[static_cast<std::size_t>(b)];
    if ((fa < 0.0) == (fb < 0.0)) continue;
    if (lex_less(cell.vertices[static_cast<std::size_t>(b)], cell.vertices[static_cast<std::size_t>(a)])) std::swap(a, b);
    roots.push_back(edge_surface_root(cell.vertices[static_cast<std::size_t>(a)], cell.vertices[static_cast<std::size_t>(b)],
                                      values[static_cast<std::size_t>(a)], values[static_cast<std::size_t>(b)], grad(a),
                                      grad(b), field));
  }
  return roots;
}

inline constexpr double kZeroTolerance = 1e-14;

struct ProjectionResult {
  Vec3 point;
  int iterations = 0;
};

/// Moves y0 along the line y0 + s N until the field vanishes, each step taking
/// the smallest-magnitude root of the second-order model of the field along N.
inline ProjectionResult project_to_surface(const Vec3& y0, const Vec3& direction, const LevelSetField& field,
                                           double tol = kZeroTolerance, int max_iterations = 50) {
  const Vec3 n = normalized(direction);
  Vec3 y = y0;
  for (int it = 0; it <= max_iterations; ++it) {
    const FieldSample s = field.sample(y);
    if (std::abs(s.value) <= tol) return {y, it};
    if (it == max_iterations) break;
    const double g = dot(s.gradient, n);
    const double c = 0.5 * quadratic_form(n, s.hessian, n);
    double step = 0.0;
    bool have = false;
    if (c != 0.0 && std::abs(c) > 1e-14 * std::abs(g)) {
      const auto r = solve_quadratic(c, g, s.value);
      if (r.count > 0) {
        step = r[0];
        for (double x : r)
          if (std::abs(x) < std::abs(step)) step = x;
        have = true;
      }
    }
    if (!have) {
      if (g == 0.0) break;
      step = -s.value / g;
    }
    const Vec3 next = y + step * n;
    // Once the update is below the spacing of doubles at y, no further
    // progress is possible; accept the point.
    if (norm(next - y) <= 2.0 * std::numeric_limits<double>::epsilon() * norm(y)) return {next, it + 1};
    y = next;
  }
  throw NumericalError("projection failed to converge");
}

/// Principal frame at a surface point from the shape operator
/// S = -(t^T H t) / |grad| in an arbitrary orthonormal tangent basis t.
/// A sphere of radius R (interior inside) has kappa1 = kappa2 = -1/R.
inline ParaboloidFrame weingarten_frame(const LevelSetField& field, const Vec3& x) {
  const FieldSample s = field.sample(x);
  const double gn = norm(s.gradient);
  if (!(gn > 1e-12)) throw NumericalError("degenerate surface point");
  const Vec3 n0 = s.gradient / gn;
  int axis = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(n0[i]) < std::abs(n0[axis])) axis = i;
  Vec3 e;
  e[axis] = 1.0;
  const Vec3 t1 = normalized(e - dot(e, n0) * n0);
  const Vec3 t2 = cross(n0, t1);
  const double s11 = -quadratic_form(t1, s.hessian, t1) / gn;
  const double s12 = -0.5 * (quadratic_form(t1, s.hessian, t2) + quadratic_form(t2, s.hessian, t1)) / gn;
  const double s22 = -quadratic_form(t2, s.hessian, t2) / gn;
  const SymmetricEigen2 eig = symmetric_eigen_2x2(s11, s12, s22);

  ParaboloidFrame f;
  f.base = x;
  f.n0 = n0;
  f.tau1 = normalized(eig.first.x * t1 + eig.first.y * t2);
  f.tau2 = cross(n0, f.tau1);
  f.kappa1 = eig.values[0];
  f.kappa2 = eig.values[1];
  return f;
}

struct SurfaceApproximation {
  ParaboloidFrame frame;
  int root_count = 0;
  bool normal_fallback = false;  ///< plane fit impossible, gradient used instead
  int projection_iterations = 0;
};

/// Full per-cell pipeline: edge roots, their mean, plane-fit normal, projection
/// onto the surface, principal frame at the projected point.
inline SurfaceApproximation approximate_cell_surface(const Polyhedron& cell, std::span<const double> values,
                                                     const LevelSetField& field) {
  const auto roots = cell_surface_roots(cell, values, field);
  if (roots.empty()) throw ParameterError("approximate_cell_surface: cell is not intersected");
  SurfaceApproximation out;
  out.root_count = static_cast<int>(roots.size());
  Vec3 mean;
  for (const Vec3& r : roots) mean += r;
  mean = mean / static_cast<double>(roots.size());

  const Vec3 g = field.gradient(mean);
  Vec3 dir;
  bool fitted = false;
  if (roots.size() >= 3) {
    try {
      dir = plane_fit(roots).normal;
      fitted = true;
    } catch (const NumericalError&) {
    }
  }
  if (fitted) {
    if (dot(dir, g) < 0.0) dir = -dir;
  } else {
    if (!(norm(g) > 0.0)) throw NumericalError("degenerate surface point");
    dir = normalized(g);
    out.normal_fallback = true;
  }
  const ProjectionResult p = project_to_surface(mean, dir, field);
  out.projection_iterations = p.iterations;
  out.frame = weingarten_frame(field, p.point);
  return out;
}

inline SurfaceApproximation approximate_cell_surface(const Polyhedron& cell, const LevelSetField& field) {
  const auto values = cell_vertex_values(cell, field);
  return approximate_cell_surface(cell, values, field);
}

}  // namespace paraclip
