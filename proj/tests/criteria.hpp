#pragma once

// Randomized checks shared by the unit tests (small sizes) and the acceptance
// run (full sizes). Each returns the worst observed deviation together with
// the verdict at the requested tolerance.

#include <algorithm>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "paraclip/paraclip.hpp"

namespace criteria {

using namespace paraclip;

struct Outcome {
  bool pass = true;
  double worst = 0.0;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string note;

  void record(double deviation, bool ok) {
    ++cases;
    worst = std::max(worst, deviation);
    if (!ok) {
      ++failures;
      pass = false;
    }
  }
};

/// Largest |V(5 nodes) - V(20 nodes)| / |cell| seen by the checks below.
struct QuadratureLog {
  double worst = 0.0;
  std::size_t cases = 0;

  void compare(const Polyhedron& cell, const ParaboloidFrame& f, double v5, double vol) {
    ClipOptions o;
    o.quadrature_nodes = 20;
    worst = std::max(worst, std::abs(clip_volume(cell, f, o).volume - v5) / vol);
    ++cases;
  }
};

// ---------------------------------------------------------------------------
// Plane clips against the half-space oracle
// ---------------------------------------------------------------------------

inline Outcome plane_vs_halfspace(int count, std::uint64_t seed, double tol, QuadratureLog* qlog = nullptr) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Outcome out;
  for (int i = 0; i < count; ++i) {
    const Polyhedron cell = oracle::random_cell(rng, i);
    const double vol = cell.volume();
    Vec3 base = cell.vertex_centroid() + 0.3 * cell.diameter() * Vec3{u(rng), u(rng), u(rng)};
    // Every fifth plane passes exactly through a vertex.
    if (i % 5 == 4) base = cell.vertices[rng() % cell.vertices.size()];
    const Vec3 n = oracle::random_unit(rng);
    const auto f = ParaboloidFrame::from_normal_tangent(base, n, oracle::random_unit(rng), 0.0, 0.0);
    const double v = clip_volume(cell, f).volume;
    const double ref = oracle::halfspace_volume(cell, n, dot(n, base));
    const double dev = std::abs(v - ref) / vol;
    out.record(dev, dev <= tol);
    if (qlog) qlog->compare(cell, f, v, vol);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Paraboloid clips against Monte Carlo
// ---------------------------------------------------------------------------

struct MonteCarloOutcome {
  Outcome outcome;
  double worst_z = 0.0;
  double chi2 = 0.0;  ///< sum of z^2, about `cases` for an unbiased kernel
  // The worst case, kept for a recheck with more samples.
  Polyhedron worst_cell;
  ParaboloidFrame worst_frame;
  double worst_volume = 0.0;
};

/// z score of a clipped volume against a fresh Monte Carlo estimate.
inline double monte_carlo_z(const Polyhedron& cell, const ParaboloidFrame& f, double v, long samples, std::uint64_t seed) {
  const auto mc = oracle::monte_carlo_volume(cell, [&](const Vec3& x) { return f.value(x) <= 0.0; }, samples, seed);
  return (v - mc.volume) / mc.sigma;
}

inline MonteCarloOutcome paraboloid_vs_monte_carlo(int count, long samples, std::uint64_t seed, double nsigma,
                                                   QuadratureLog* qlog = nullptr) {
  std::mt19937_64 rng(seed);
  MonteCarloOutcome r;
  for (int i = 0; i < count; ++i) {
    Polyhedron cell;
    ParaboloidFrame f;
    double v = 0.0, vol = 0.0;
    // Only genuinely cut cells are informative.
    for (;;) {
      cell = oracle::random_cell(rng, i);
      f = oracle::random_frame(rng, cell, 8.0);
      vol = cell.volume();
      v = clip_volume(cell, f).volume;
      if (v > 0.05 * vol && v < 0.95 * vol) break;
    }
    const auto mc = oracle::monte_carlo_volume(cell, [&](const Vec3& x) { return f.value(x) <= 0.0; }, samples, rng());
    const double z = std::abs(v - mc.volume) / mc.sigma;
    r.chi2 += z * z;
    if (z > r.worst_z) {
      r.worst_z = z;
      r.worst_cell = cell;
      r.worst_frame = f;
      r.worst_volume = v;
    }
    r.outcome.record(std::abs(v - mc.volume) / vol, z <= nsigma);
    if (qlog) qlog->compare(cell, f, v, vol);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Complementarity
// ---------------------------------------------------------------------------

inline Outcome complementarity(int count, std::uint64_t seed, double tol, QuadratureLog* qlog = nullptr) {
  std::mt19937_64 rng(seed);
  Outcome out;
  for (int i = 0; i < count; ++i) {
    const Polyhedron cell = oracle::random_cell(rng, i);
    const auto f = oracle::random_frame(rng, cell, 8.0);
    const double vol = cell.volume();
    const auto [inner, outer] = clip_complement_check(cell, f);
    const double dev = std::abs(inner + outer - vol) / vol;
    out.record(dev, dev <= tol);
    if (qlog) qlog->compare(cell, f, inner, vol);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Paraboloid sweep through the table
// ---------------------------------------------------------------------------

/// Values of s at which the shifted paraboloid passes a vertex or touches an
/// edge or a face of the cell; the volume fraction has kinks in its second
/// derivative there.
inline std::vector<double> sweep_kinks(const Polyhedron& cell, const ParaboloidFrame& f0) {
  std::vector<double> s;
  for (const Vec3& v : cell.vertices) s.push_back(f0.value(v));
  for (auto [a, b] : cell.edges()) {
    const Vec3 p = cell.vertices[static_cast<std::size_t>(a)], d = cell.vertices[static_cast<std::size_t>(b)] - p;
    // g(p + t d) is quadratic in t.
    const double g0 = f0.value(p), g1 = f0.value(p + d), gm = f0.value(p + 0.5 * d);
    const double c2 = 2.0 * (g1 + g0 - 2.0 * gm), c1 = g1 - g0 - c2;
    if (c2 != 0.0) {
      const double t = -c1 / (2.0 * c2);
      if (t > 0.0 && t < 1.0) s.push_back(f0.value(p + t * d));
    }
  }
  for (std::size_t k = 0; k < cell.faces.size(); ++k) {
    const auto pts = cell.face_points(k);
    const Vec3 n = normalized(cell.face_area_vector(k));
    const Vec3 m1 = normalized(pts[1] - pts[0]), m2 = cross(n, m1);
    // Stationary points of g on the face plane: gradient orthogonal to both
    // in-plane directions. g is quadratic, so solve the 2x2 system.
    auto g = [&](double x, double y) { return f0.value(pts[0] + x * m1 + y * m2); };
    const double gxx = g(1, 0) + g(-1, 0) - 2 * g(0, 0), gyy = g(0, 1) + g(0, -1) - 2 * g(0, 0);
    const double gxy = 0.25 * (g(1, 1) - g(1, -1) - g(-1, 1) + g(-1, -1));
    const double gx = 0.5 * (g(1, 0) - g(-1, 0)), gy = 0.5 * (g(0, 1) - g(0, -1));
    const double det = gxx * gyy - gxy * gxy;
    if (std::abs(det) > 1e-12 * (gxx * gxx + gyy * gyy + gxy * gxy)) {
      const double x = (-gx * gyy + gy * gxy) / det, y = (-gy * gxx + gx * gxy) / det;
      s.push_back(g(x, y));
    } else if (gxx != 0.0 || gyy != 0.0) {
      // Rank one: a line of stationary points exists only if the gradient
      // lies in the range; its value is a (conservative) kink candidate.
      const double t = gxx != 0.0 ? -gx / gxx : -gy / gyy;
      s.push_back(gxx != 0.0 ? g(t, 0) : g(0, t));
    }
  }
  return s;
}

struct SweepOutcome {
  double rho_min = 0.0, rho_max = 0.0;
  bool endpoints_min = false, endpoints_max = false;
  bool monotone = true;
  double worst_decrease = 0.0;
  Outcome derivative;
  double quad_worst = 0.0;
  double cell_max = 0.0;  ///< largest unshifted level-set value over the cell
};

inline SweepOutcome sweep(int steps, double endpoint_tol, double derivative_tol) {
  SweepOutcome r;
  const Polyhedron cell = build_table_polyhedron();
  const double vol = cell.volume();
  const auto rows = paraboloid_sweep(steps, cell);
  const auto rows20 = paraboloid_sweep(steps, cell, kSweepMin, kSweepMax, 20);
  r.rho_min = rows.front().rho;
  r.rho_max = rows.back().rho;
  r.endpoints_min = std::abs(r.rho_min) <= endpoint_tol;
  r.endpoints_max = std::abs(1.0 - r.rho_max) <= endpoint_tol;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double dec = rows[i].rho - rows[i + 1].rho;
    if (dec > 0.0) {
      r.monotone = false;
      r.worst_decrease = std::max(r.worst_decrease, dec);
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) r.quad_worst = std::max(r.quad_worst, std::abs(rows[i].rho - rows20[i].rho));

  const auto kinks = sweep_kinks(cell, sweep_frame(0.0));
  for (const Vec3& v : cell.vertices) r.cell_max = std::max(r.cell_max, sweep_frame(0.0).value(v));
  // rho grows like a power 3/2 after a contact, so the step sits well inside
  // the excluded band to keep the h^2 truncation term small.
  const double h = 1e-5, band = 1e-3;
  auto rho = [&](double s) { return clip_volume(cell, sweep_frame(s)).volume / vol; };
  for (const auto& row : rows) {
    bool near = false;
    for (double k : kinks) near = near || std::abs(row.s - k) < band;
    if (near) continue;
    const double fd = oracle::central_difference(rho, row.s, h);
    if (row.drho_ds == 0.0) {
      r.derivative.record(std::abs(fd), std::abs(fd) <= 1e-12);
    } else {
      const double dev = std::abs(fd - row.drho_ds) / row.drho_ds;
      r.derivative.record(dev, dev <= derivative_tol);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Cap areas against adaptive quadrature of the Green line integral
// ---------------------------------------------------------------------------

enum class CapFamily { Elliptic, HyperbolicLeft, HyperbolicRight, Parabolic, Linear, ParallelLines };

inline const char* to_string(CapFamily c) {
  switch (c) {
    case CapFamily::Elliptic: return "elliptic";
    case CapFamily::HyperbolicLeft: return "hyperbolic (branch -1)";
    case CapFamily::HyperbolicRight: return "hyperbolic (branch +1)";
    case CapFamily::Parabolic: return "parabolic";
    case CapFamily::Linear: return "linear";
    case CapFamily::ParallelLines: return "parallel lines";
  }
  return "?";
}

inline double frobenius(const Mat2& a) {
  return std::sqrt(a(0, 0) * a(0, 0) + a(0, 1) * a(0, 1) + a(1, 0) * a(1, 0) + a(1, 1) * a(1, 1));
}

struct RandomConic {
  ParaboloidFrame frame;
  FaceFrame face;
  FaceConic conic;
};

/// Random paraboloid and face plane whose intersection is a real conic of the
/// requested family.
inline RandomConic random_conic(std::mt19937_64& rng, CapFamily fam) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), mag(0.3, 8.0);
  for (;;) {
    const Mat3 rot = oracle::random_rotation(rng);
    RandomConic rc;
    ParaboloidFrame& f = rc.frame;
    f.base = Vec3{u(rng), u(rng), u(rng)};
    f.tau1 = rot.column(0);
    f.tau2 = rot.column(1);
    f.n0 = rot.column(2);
    const double k1 = mag(rng) * (u(rng) < 0 ? -1 : 1);
    double k2 = mag(rng) * (u(rng) < 0 ? -1 : 1);
    Vec3 normal = oracle::random_unit(rng);
    ConicClass want = ConicClass::Elliptic;
    switch (fam) {
      case CapFamily::Elliptic: k2 = std::copysign(k2, k1); break;
      case CapFamily::HyperbolicLeft:
      case CapFamily::HyperbolicRight:
        k2 = -std::copysign(k2, k1);
        want = ConicClass::Hyperbolic;
        break;
      case CapFamily::Parabolic:
        k2 = 0.0;
        want = ConicClass::Parabolic;
        break;
      case CapFamily::Linear:
        k2 = 0.0;
        normal = f.tau1;  // the paraboloid is constant across the face
        want = ConicClass::Linear;
        break;
      case CapFamily::ParallelLines:
        k2 = 0.0;
        normal = f.n0;  // face parallel to the base plane
        want = ConicClass::ParallelLines;
        break;
    }
    if (want != ConicClass::Linear && want != ConicClass::ParallelLines && std::abs(dot(normal, f.n0)) < 0.2) continue;
    f.kappa1 = k1;
    f.kappa2 = k2;
    rc.face.origin = f.base + 0.4 * Vec3{u(rng), u(rng), u(rng)};
    rc.face.normal = normal;
    Vec3 m = oracle::random_unit(rng);
    m = m - dot(m, normal) * normal;
    if (norm(m) < 0.1) continue;
    rc.face.mu1 = normalized(m);
    rc.face.mu2 = cross(normal, rc.face.mu1);
    rc.conic = classify_face(f, rc.face);
    if (rc.conic.cls == want && rc.conic.real) return rc;
  }
}

struct CapOutcome {
  Outcome outcome;
  double worst_curve_residual = 0.0;  ///< |q(u(s))| / |q| scale on the parametrized arc
};

/// Closed-form caps against adaptive quadrature of
///   1/2 int (w(s) - w(s0)) x w'(s) ds
/// along the arc, w'(s) from the standard parametrization of each class.
inline CapOutcome caps_vs_quadrature(CapFamily fam, int count, std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(fam) * 7919);
  std::uniform_real_distribution<double> u(-1.0, 1.0), e(-6.0, 0.0);
  CapOutcome r;
  for (int i = 0; i < count; ++i) {
    const RandomConic rc = random_conic(rng, fam);
    const FaceConic& c = rc.conic;
    const int comp = fam == CapFamily::HyperbolicLeft ? 0 : (fam == CapFamily::HyperbolicRight ? 1 : 0);
    const double br = FaceConic::branch_sign(comp);
    // A quarter of the arcs are short, down to 1e-6 in parameter.
    const bool shortarc = i % 4 == 0;
    double s0 = 0.0, delta = 0.0;
    switch (fam) {
      case CapFamily::Elliptic:
        s0 = std::numbers::pi * u(rng);
        delta = shortarc ? std::pow(10.0, e(rng)) * (u(rng) < 0 ? -1 : 1) : 2.0 * std::numbers::pi * u(rng);
        break;
      case CapFamily::HyperbolicLeft:
      case CapFamily::HyperbolicRight:
        s0 = 2.0 * u(rng);
        delta = shortarc ? std::pow(10.0, e(rng)) * (u(rng) < 0 ? -1 : 1) : 2.5 * u(rng);
        break;
      case CapFamily::Parabolic: {
        const double scale = std::abs(c.b2 / c.B1);
        s0 = scale * u(rng);
        delta = scale * (shortarc ? std::pow(10.0, e(rng)) * (u(rng) < 0 ? -1 : 1) : 2.0 * u(rng));
        break;
      }
      default:
        s0 = u(rng);
        delta = u(rng);
        break;
    }
    // Arc displacement and tangent in extended precision, in terms of the
    // offset t = s - s0 so that short arcs keep their relative accuracy.
    using LD = long double;
    struct W {
      LD x, y;
    };
    const LD p = c.p, q = c.q, S0 = s0;
    const Vec2 ew = c.displacement_to_working(c.e);
    auto disp = [&](LD t) -> W {
      switch (fam) {
        case CapFamily::Elliptic: {
          const LD m = S0 + t / 2, h = std::sin(t / 2);
          return {-2 * p * std::sin(m) * h, 2 * q * std::cos(m) * h};
        }
        case CapFamily::HyperbolicLeft:
        case CapFamily::HyperbolicRight: {
          const LD m = S0 + t / 2, h = std::sinh(t / 2);
          return {2 * br * p * std::sinh(m) * h, 2 * q * std::cosh(m) * h};
        }
        case CapFamily::Parabolic: return {t, -(LD(c.b1) * t + LD(c.B1) * t * (2 * S0 + t)) / LD(c.b2)};
        case CapFamily::ParallelLines: return {0, t};
        case CapFamily::Linear: return {ew.x * t, ew.y * t};
      }
      return {0, 0};
    };
    auto tangent = [&](LD t) -> W {
      const LD s = S0 + t;
      switch (fam) {
        case CapFamily::Elliptic: return {-p * std::sin(s), q * std::cos(s)};
        case CapFamily::HyperbolicLeft:
        case CapFamily::HyperbolicRight: return {br * p * std::sinh(s), q * std::cosh(s)};
        case CapFamily::Parabolic: return {1, -(LD(c.b1) + 2 * LD(c.B1) * s) / LD(c.b2)};
        case CapFamily::ParallelLines: return {0, 1};
        case CapFamily::Linear: return {ew.x, ew.y};
      }
      return {0, 0};
    };
    // The arc must lie on the paraboloid: lambda(x(u(s))) = 0.
    const double qscale = std::abs(c.a) + norm(c.avec) + frobenius(c.A);
    for (double t : {0.0, 0.37, 1.0}) {
      const Vec2 uf = c.point(comp, s0 + t * delta);
      const double res = std::abs(rc.frame.value(rc.face.to_space(uf))) / (qscale * (1.0 + dot(uf, uf)));
      r.worst_curve_residual = std::max(r.worst_curve_residual, res);
    }
    // Straight classes integrate rounding noise only; do not refine it.
    const bool straight = fam == CapFamily::Linear || fam == CapFamily::ParallelLines;
    auto green = [&](LD t) {
      const W d = disp(t), v = tangent(t);
      return LD(0.5) * (d.x * v.y - d.y * v.x);
    };
    // Integrate over [0, 1] with the integrand scaled to order one; the
    // adaptive rule's stopping test misbehaves on tiny absolute values.
    const LD D = delta;
    LD scale = std::abs(green(D) * D);
    if (!(scale > 0)) scale = 1;
    LD err = 0;
    const LD ref_ld = scale * boost::math::quadrature::gauss_kronrod<LD, 31>::integrate(
                                  [&](LD tau) { return green(D * tau) * D / scale; }, LD(0), LD(1), straight ? 2 : 15,
                                  LD(1e-13), &err);
    const double ref = static_cast<double>(ref_ld);
    double cap = 0.0;
    switch (fam) {
      case CapFamily::Elliptic: cap = elliptic_cap(c.p, c.q, delta); break;
      case CapFamily::HyperbolicLeft:
      case CapFamily::HyperbolicRight: cap = hyperbolic_cap(c.p, c.q, br, delta); break;
      case CapFamily::Parabolic: cap = parabolic_cap(c.B1, c.b2, delta); break;
      default: cap = 0.0; break;
    }
    // Straight classes have no cap; measure against the arc's length scale.
    const double dev = straight ? std::abs(cap - ref) / (delta * delta) : std::abs(cap - ref) / std::abs(ref);
    r.outcome.record(dev, dev <= tol);
  }
  return r;
}

}  // namespace criteria
