#pragma once

// Volume of a polyhedron below a paraboloid.
//
// With the reference point at the paraboloid base b, the divergence theorem
// applied to the truncated cell gives
//   V = 1/3 [ sum_k <x_{k,1} - b, n_k> Abar_k + sum_arcs 1/6 int H(t) dt2 ],
// where Abar_k is the immersed (lambda <= 0) area of face k, the arcs are the
// face/paraboloid intersection curves traversed with the immersed face region
// on their left, t are tangent coordinates and
//   H(t) = kappa1 t1^3 + 3 kappa12 t1^2 t2 + 3 kappa2 t1 t2^2.
// The same arcs give the area of the graph base, -int t1 dt2.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "paraclip/conic.hpp"
#include "paraclip/core_math.hpp"
#include "paraclip/errors.hpp"
#include "paraclip/frame.hpp"
#include "paraclip/mesh.hpp"

namespace paraclip {

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

enum class Stage { SurfaceApproximation, FaceIntersection, PrincipalTransformation, InteriorityCheck, BoundaryReconstruction, Quadrature };

inline constexpr int kStageCount = 6;

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::SurfaceApproximation: return "hypersurface approximation";
    case Stage::FaceIntersection: return "face intersection";
    case Stage::PrincipalTransformation: return "principal transformation";
    case Stage::InteriorityCheck: return "interiority check";
    case Stage::BoundaryReconstruction: return "boundary reconstruction";
    case Stage::Quadrature: return "quadrature";
  }
  return "?";
}

struct StageTimers {
  std::array<double, kStageCount> seconds{};

  StageTimers& operator+=(const StageTimers& o) {
    for (int i = 0; i < kStageCount; ++i) seconds[i] += o.seconds[i];
    return *this;
  }
};

/// Adds the time since the previous mark to a stage (no-op without timers).
class StageClock {
 public:
  explicit StageClock(StageTimers* t) : timers_(t) {
    if (timers_) last_ = std::chrono::steady_clock::now();
  }
  void mark(Stage s) {
    if (!timers_) return;
    const auto now = std::chrono::steady_clock::now();
    timers_->seconds[static_cast<int>(s)] += std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

 private:
  StageTimers* timers_;
  std::chrono::steady_clock::time_point last_{};
};

// ---------------------------------------------------------------------------
// Edges
// ---------------------------------------------------------------------------

enum class CrossingKind { Entering, Leaving };

/// Paraboloid restricted to the segment p0 + v (p1 - p0), v in [0, 1].
struct EdgeClipResult {
  int root_count = 0;                  ///< roots strictly inside (0, 1)
  std::array<double, 2> roots{};       ///< ascending
  std::array<bool, 3> inside{};        ///< status of the root_count + 1 sub-intervals
  double immersed_fraction = 0.0;      ///< length fraction with lambda <= 0
  bool degenerate = false;             ///< lambda vanishes identically on the edge

  bool is_crossing(int j) const { return inside[j] != inside[j + 1]; }
  /// Kind of root j when walking from p0 to p1 (only meaningful if is_crossing).
  CrossingKind kind(int j) const { return inside[j] ? CrossingKind::Leaving : CrossingKind::Entering; }
};

/// lam0 must be the level-set value at p0 (passed in so that vertex values
/// are shared between all edges that meet there).
inline EdgeClipResult edge_clip(const ParaboloidFrame& f, const Vec3& p0, const Vec3& p1, double lam0) {
  EdgeClipResult r;
  const Vec3 d = p1 - p0;
  const Vec2 t0 = f.tangent_coords(p0);
  const Vec2 td{dot(d, f.tau1), dot(d, f.tau2)};
  const double c0 = lam0;
  const double c1 = dot(d, f.n0) - (f.kappa1 * t0.x * td.x + f.kappa12 * (t0.x * td.y + t0.y * td.x) + f.kappa2 * t0.y * td.y);
  const double c2 = -0.5 * (f.kappa1 * td.x * td.x + 2.0 * f.kappa12 * td.x * td.y + f.kappa2 * td.y * td.y);

  QuadraticRoots all;
  try {
    all = solve_quadratic(c2, c1, c0);
  } catch (const NumericalError&) {
    r.degenerate = true;
    r.inside[0] = true;
    r.immersed_fraction = 1.0;
    return r;
  }
  // Sign of the quadratic at v from its factorization (robust between close roots).
  auto sign_at = [&](double v) {
    double s;
    if (c2 != 0.0) {
      s = c2 > 0.0 ? 1.0 : -1.0;
      if (all.count == 2)
        for (double x : all) s *= (v < x ? -1.0 : 1.0);
    } else if (c1 != 0.0) {
      s = (c1 > 0.0 ? 1.0 : -1.0) * (v < all[0] ? -1.0 : 1.0);
    } else {
      s = c0 > 0.0 ? 1.0 : (c0 < 0.0 ? -1.0 : 0.0);
    }
    return s;
  };
  for (double x : all)
    if (x > 0.0 && x < 1.0) r.roots[static_cast<std::size_t>(r.root_count++)] = x;
  if (r.root_count == 2 && r.roots[0] == r.roots[1]) r.root_count = 1;

  double lo = 0.0;
  for (int j = 0; j <= r.root_count; ++j) {
    const double hi = j < r.root_count ? r.roots[static_cast<std::size_t>(j)] : 1.0;
    r.inside[static_cast<std::size_t>(j)] = sign_at(0.5 * (lo + hi)) <= 0.0;
    if (r.inside[static_cast<std::size_t>(j)]) r.immersed_fraction += hi - lo;
    lo = hi;
  }
  return r;
}

inline EdgeClipResult edge_clip(const ParaboloidFrame& frame, const Vec3& p0, const Vec3& p1) {
  const ParaboloidFrame f = frame.folded();
  return edge_clip(f, p0, p1, f.value(p0));
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// One arc of the boundary of an immersed face region, traversed with the
/// region on its left: parameter s0 -> s0 + delta on the given component.
struct CurveSegment {
  int face = 0;
  ConicClass cls = ConicClass::Empty;
  int branch = 0;  ///< -1 / +1 on hyperbolas and line pairs, 0 otherwise
  double s0 = 0.0;
  double delta = 0.0;
  Vec3 start;
  Vec3 end;
  bool closed = false;
  double cap = 0.0;
  double boundary_integral = 0.0;
  double support_area = 0.0;
};

struct ClipDiagnostics {
  std::array<int, kConicClassCount> face_classes{};  ///< faces per conic class
  std::array<int, kConicClassCount> arc_classes{};   ///< arcs per conic class
  int enclosed_ellipses = 0;
  int cancelled_crossing_pairs = 0;
  int orientation_disagreements = 0;
  int refined_arcs = 0;
};

struct ClipResult {
  double volume = 0.0;
  double support_area = 0.0;  ///< area of the graph base inside the cell
  std::vector<double> face_areas;
  std::vector<ConicClass> face_classes;
  std::vector<CurveSegment> segments;
  ClipDiagnostics diagnostics;
};

struct ClipOptions {
  int quadrature_nodes = 5;
  bool refine_arcs = true;          ///< chord-based refinement of arc parameters
  bool keep_segments = false;       ///< fill ClipResult::segments
  StageTimers* timers = nullptr;
};

// ---------------------------------------------------------------------------
// Internals
// ---------------------------------------------------------------------------

namespace detail {

struct Crossing {
  Vec3 x;
  Vec2 u;
  CrossingKind kind;
  int component = 0;
  double s = 0.0;
};

inline bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xc) in = !in;
    }
  }
  return in;
}

/// Arc displacement D(theta) = w(s0 + theta) - w(s0) in working coordinates
/// (face coordinates for the linear class) and its derivative.
struct ArcLocal {
  const FaceConic* c;
  int comp;
  double s0;

  Vec2 disp(double th) const {
    const double br = FaceConic::branch_sign(comp);
    switch (c->cls) {
      case ConicClass::Elliptic: {
        const double sh = std::sin(0.5 * th);
        const double m = s0 + 0.5 * th;
        return {-2.0 * c->p * sh * std::sin(m), 2.0 * c->q * sh * std::cos(m)};
      }
      case ConicClass::Hyperbolic: {
        const double sh = std::sinh(0.5 * th);
        const double m = s0 + 0.5 * th;
        return {2.0 * br * c->p * sh * std::sinh(m), 2.0 * c->q * sh * std::cosh(m)};
      }
      case ConicClass::Parabolic: return {th, -(c->b1 * th + c->B1 * th * (2.0 * s0 + th)) / c->b2};
      case ConicClass::ParallelLines: return {0.0, th};
      case ConicClass::Linear: return th * c->e;
      case ConicClass::Empty: break;
    }
    return {};
  }

  Vec2 deriv(double th) const {
    const double br = FaceConic::branch_sign(comp);
    const double s = s0 + th;
    switch (c->cls) {
      case ConicClass::Elliptic: return {-c->p * std::sin(s), c->q * std::cos(s)};
      case ConicClass::Hyperbolic: return {br * c->p * std::sinh(s), c->q * std::cosh(s)};
      case ConicClass::Parabolic: return {1.0, -(c->b1 + 2.0 * c->B1 * s) / c->b2};
      case ConicClass::ParallelLines: return {0.0, 1.0};
      case ConicClass::Linear: return c->e;
      case ConicClass::Empty: break;
    }
    return {};
  }
};

inline double wrap_positive(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  x = std::fmod(x, two_pi);
  if (x <= 0.0) x += two_pi;
  return x;
}

/// Chord-based recomputation of (s0, delta) for conic arcs. The chord is
/// known to full precision from face coordinates, while the atan2/asinh
/// parameters lose accuracy when the conic centre is far from the face.
inline bool refine_arc(const FaceConic& c, int comp, const Vec2& chord_w, double& s0, double& delta) {
  if (c.cls == ConicClass::Elliptic) {
    if (!(std::abs(delta) < 0.5 * std::numbers::pi)) return false;
    const double X = -chord_w.x / (2.0 * c.p);
    const double Y = chord_w.y / (2.0 * c.q);
    const double rho = std::hypot(X, Y);
    if (rho == 0.0) return false;
    const double sg = delta >= 0.0 ? 1.0 : -1.0;
    const double d = sg * 2.0 * std::asin(std::min(rho, 1.0));
    double m = std::atan2(sg * X, sg * Y);
    const double m_ref = s0 + 0.5 * delta;
    m += 2.0 * std::numbers::pi * std::round((m_ref - m) / (2.0 * std::numbers::pi));
    s0 = m - 0.5 * d;
    delta = d;
    return true;
  }
  if (c.cls == ConicClass::Hyperbolic) {
    const double br = FaceConic::branch_sign(comp);
    const double X = br * chord_w.x / (2.0 * c.p);  // sinh(m) sinh(delta/2)
    const double Y = chord_w.y / (2.0 * c.q);       // cosh(m) sinh(delta/2)
    if (Y == 0.0) return false;
    const double ratio = X / Y;
    if (!(std::abs(ratio) < 0.9)) return false;
    const double m = std::atanh(ratio);
    const double d = 2.0 * std::asinh(Y / std::cosh(m));
    if ((d >= 0.0) != (delta >= 0.0)) return false;
    s0 = m - 0.5 * d;
    delta = d;
    return true;
  }
  return false;
}

/// Cell-local cache of edge clips keyed by local vertex pair.
struct EdgeEntry {
  int a, b;  ///< a: canonical start vertex (lexicographically smaller point)
  EdgeClipResult clip;
};

inline bool lex_less(const Vec3& p, const Vec3& q) {
  return p.x != q.x ? p.x < q.x : (p.y != q.y ? p.y < q.y : p.z < q.z);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Main kernel
// ---------------------------------------------------------------------------

namespace detail {

struct FaceOutput {
  double area = 0.0;
  double boundary_integral = 0.0;
  double support_area = 0.0;
  ConicClass cls = ConicClass::Empty;
};

class CellClipper {
 public:
  CellClipper(const Polyhedron& cell, const ParaboloidFrame& frame, const ClipOptions& opt, ClipResult& out)
      : cell_(cell), f_(frame), opt_(opt), out_(out), clock_(opt.timers) {
    values_.resize(cell.vertices.size());
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = f_.value(cell.vertices[i]);
    diameter_ = cell.diameter();
  }

  FaceOutput face(std::size_t k) {
    const auto& cyc = cell_.faces[k];
    const std::size_t n = cyc.size();
    FaceOutput fo;

    // Face frame.
    std::vector<Vec3> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = cell_.vertices[static_cast<std::size_t>(cyc[i])];
    const Vec3 area_vec = polygon_area_vector(pts);
    const double face_area = norm(area_vec);
    if (!(face_area > 0.0)) throw GeometryError("degenerate face");
    FaceFrame ff;
    ff.origin = pts[0];
    ff.normal = area_vec / face_area;
    ff.mu1 = normalized(pts[1] - pts[0]);
    ff.mu2 = cross(ff.normal, ff.mu1);
    int p = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(ff.normal[i]) > std::abs(ff.normal[p])) p = i;
    const int pa = (p + 1) % 3, pb = (p + 2) % 3;
    auto cross_p = [&](const Vec3& x, const Vec3& y) { return x[pa] * y[pb] - x[pb] * y[pa]; };

    // Edge clipping and the status walk around the face.
    CompensatedSum poly;  // p-component of twice the area vector
    std::vector<Crossing> xs;
    bool prev_in = false;
    bool have_prev = false;
    bool first_in = false;
    std::vector<bool> vertex_in(n);
    for (std::size_t i = 0; i < n; ++i) vertex_in[i] = values_[static_cast<std::size_t>(cyc[i])] <= 0.0;
    auto push_status = [&](bool in, const Vec3& at) {
      if (!have_prev) {
        first_in = in;
        have_prev = true;
      } else if (in != prev_in) {
        xs.push_back({at, {}, in ? CrossingKind::Entering : CrossingKind::Leaving});
      }
      prev_in = in;
    };
    for (std::size_t i = 0; i < n; ++i) {
      const int va = cyc[i], vb = cyc[(i + 1) % n];
      const EdgeEntry& e = edge(va, vb);
      const bool forward = e.a == va;
      const Vec3& c0 = cell_.vertices[static_cast<std::size_t>(e.a)];
      const Vec3& c1 = cell_.vertices[static_cast<std::size_t>(e.b)];
      const Vec3& P = pts[i];
      push_status(vertex_in[i], P);
      const int m = e.clip.root_count;
      for (int j = 0; j <= m; ++j) {
        const int jj = forward ? j : m - j;  // sub-interval index in canonical order
        Vec3 at = P;
        if (j > 0) {
          const int root = forward ? j - 1 : m - j;
          at = c0 + e.clip.roots[static_cast<std::size_t>(root)] * (c1 - c0);
        }
        push_status(e.clip.inside[static_cast<std::size_t>(jj)], at);
      }
      poly += e.clip.immersed_fraction * cross_p(P - ff.origin, pts[(i + 1) % n] - ff.origin);
    }
    // Close the cycle back to the first status (the first vertex).
    if (prev_in != first_in) xs.push_back({pts[0], {}, first_in ? CrossingKind::Entering : CrossingKind::Leaving});
    clock_.mark(Stage::FaceIntersection);

    const FaceConic conic = classify_face(f_, ff);
    fo.cls = conic.cls;
    clock_.mark(Stage::PrincipalTransformation);

    // Leaving -> Entering chords, caps and arcs.
    CompensatedSum caps;
    const double dup_tol = 1e-13 * diameter_;
    auto add_chord = [&](const Vec3& xl, const Vec3& xe) { poly += cross_p(xl - ff.origin, xe - ff.origin); };

    // Zero-length crossing pairs (status flickers at a vertex or a touching
    // point) close on themselves: keep their chord, drop them from pairing.
    for (bool again = true; again && xs.size() >= 2;) {
      again = false;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::size_t j = (i + 1) % xs.size();
        if (norm(xs[i].x - xs[j].x) <= dup_tol) {
          const Crossing& L = xs[i].kind == CrossingKind::Leaving ? xs[i] : xs[j];
          const Crossing& E = xs[i].kind == CrossingKind::Leaving ? xs[j] : xs[i];
          add_chord(L.x, E.x);
          ++out_.diagnostics.cancelled_crossing_pairs;
          if (j > i) {
            xs.erase(xs.begin() + static_cast<std::ptrdiff_t>(j));
            xs.erase(xs.begin() + static_cast<std::ptrdiff_t>(i));
          } else {
            xs.erase(xs.begin() + static_cast<std::ptrdiff_t>(i));
            xs.erase(xs.begin());
          }
          again = true;
          break;
        }
      }
    }

    std::vector<Vec2> uverts(n);
    for (std::size_t i = 0; i < n; ++i) uverts[i] = ff.to_face(pts[i]);

    struct PendingArc {
      int comp;
      double s0, delta;
      Vec3 xl, xe;
      Vec2 ul, ue;
      bool closed;
    };
    std::vector<PendingArc> arcs;

    if (!xs.empty()) {
      for (Crossing& c : xs) c.u = ff.to_face(c.x);
      if (!conic.real || conic.cls == ConicClass::Empty) {
        // No usable curve (tangential or trivial configuration): join each
        // Leaving crossing to the next Entering one along the boundary.
        for (std::size_t i = 0; i < xs.size(); ++i) {
          if (xs[i].kind != CrossingKind::Leaving) continue;
          const Crossing& E = xs[(i + 1) % xs.size()];
          add_chord(xs[i].x, E.x);
        }
        clock_.mark(Stage::BoundaryReconstruction);
      } else {
        pair_crossings(conic, xs, uverts, arcs, k);
        clock_.mark(Stage::BoundaryReconstruction);
      }
    } else if (conic.cls == ConicClass::Elliptic && conic.real) {
      // Possibly an ellipse lying wholly inside the face.
      if (point_in_polygon(uverts, conic.u0)) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i)
          if (std::abs(conic.value(uverts[i])) > std::abs(conic.value(uverts[far]))) far = i;
        const bool vertex_outside_ellipse = (conic.value(uverts[far]) > 0.0) == (conic.B1 > 0.0);
        if (vertex_outside_ellipse) {
          const Vec2 u = conic.point(0, 0.0);
          const Vec3 x = ff.to_space(u);
          arcs.push_back({0, 0.0, conic.direction(0) * 2.0 * std::numbers::pi, x, x, u, u, true});
          ++out_.diagnostics.enclosed_ellipses;
        }
      }
      clock_.mark(Stage::InteriorityCheck);
    }

    // Arc contributions.
    const GaussRule rule(opt_.quadrature_nodes);
    CompensatedSum bint, supp;
    for (PendingArc& a : arcs) {
      if (!a.closed) {
        add_chord(a.xl, a.xe);
        if (opt_.refine_arcs &&
            refine_arc(conic, a.comp, conic.displacement_to_working(a.ue - a.ul), a.s0, a.delta))
          ++out_.diagnostics.refined_arcs;
      }
      double cap = 0.0;
      switch (conic.cls) {
        case ConicClass::Elliptic: cap = elliptic_cap(conic.p, conic.q, a.delta); break;
        case ConicClass::Hyperbolic: cap = hyperbolic_cap(conic.p, conic.q, FaceConic::branch_sign(a.comp), a.delta); break;
        case ConicClass::Parabolic: cap = parabolic_cap(conic.B1, conic.b2, a.delta); break;
        default: break;
      }
      caps += cap;
      clock_.mark(Stage::BoundaryReconstruction);

      // Tangent-coordinate image: t(theta) = tL + TW D(theta).
      const ArcLocal loc{&conic, a.comp, a.s0};
      const Vec2 tl = f_.tangent_coords(a.xl);
      Vec3 w1 = ff.mu1, w2 = ff.mu2;  // face directions of the working axes
      if (conic.cls != ConicClass::Linear) {
        w1 = conic.r1.x * ff.mu1 + conic.r1.y * ff.mu2;
        w2 = conic.r2.x * ff.mu1 + conic.r2.y * ff.mu2;
      }
      const double T11 = dot(f_.tau1, w1), T12 = dot(f_.tau1, w2);
      const double T21 = dot(f_.tau2, w1), T22 = dot(f_.tau2, w2);
      const bool curved = conic.cls == ConicClass::Elliptic || conic.cls == ConicClass::Hyperbolic;
      // Pieces of pi/64 keep the 5-node rule at rounding level for the
      // degree-4 trigonometric (or hyperbolic) integrand.
      const int pieces = curved ? std::max(1, static_cast<int>(std::ceil(std::abs(a.delta) / (std::numbers::pi / 64.0)))) : 1;
      CompensatedSum bi, sa;
      for (int piece = 0; piece < pieces; ++piece) {
        const double lo = a.delta * piece / pieces;
        const double hi = a.delta * (piece + 1) / pieces;
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (int qn = 0; qn < rule.size(); ++qn) {
          const double th = mid + half * rule.node(qn);
          const Vec2 D = loc.disp(th);
          const Vec2 Dp = loc.deriv(th);
          const double t1 = tl.x + T11 * D.x + T12 * D.y;
          const double t2 = tl.y + T21 * D.x + T22 * D.y;
          const double dt2 = T21 * Dp.x + T22 * Dp.y;
          const double H = f_.kappa1 * t1 * t1 * t1 + 3.0 * f_.kappa12 * t1 * t1 * t2 + 3.0 * f_.kappa2 * t1 * t2 * t2;
          const double w = half * rule.weight(qn);
          bi += w * H * dt2;
          sa += w * t1 * dt2;
        }
      }
      const double arc_bi = bi.value() / 6.0;
      const double arc_sa = -sa.value();
      bint += arc_bi;
      supp += arc_sa;
      ++out_.diagnostics.arc_classes[static_cast<int>(conic.cls)];

      // Outward-normal audit of the graph base at the arc midpoint.
      {
        const double th = 0.5 * a.delta;
        const Vec2 D = loc.disp(th);
        const Vec2 Dp = loc.deriv(th);
        const Vec3 xm = a.xl + D.x * w1 + D.y * w2;
        const Vec2 tp{T11 * Dp.x + T12 * Dp.y, T21 * Dp.x + T22 * Dp.y};
        const Vec3 g = f_.gradient(xm);
        const Vec3 conormal = ff.normal - (dot(ff.normal, g) / dot(g, g)) * g;
        const Vec3 lifted = -tp.y * f_.tau1 + tp.x * f_.tau2;
        const double test = dot(conormal, lifted);
        if (test < -1e-8 * norm(conormal) * norm(lifted)) ++out_.diagnostics.orientation_disagreements;
      }
      clock_.mark(Stage::Quadrature);

      if (opt_.keep_segments) {
        CurveSegment seg;
        seg.face = static_cast<int>(k);
        seg.cls = conic.cls;
        seg.branch = conic.component_count() == 2 ? static_cast<int>(FaceConic::branch_sign(a.comp)) : 0;
        seg.s0 = a.s0;
        seg.delta = a.delta;
        seg.start = a.xl;
        seg.end = a.xe;
        seg.closed = a.closed;
        seg.cap = cap;
        seg.boundary_integral = arc_bi;
        seg.support_area = arc_sa;
        out_.segments.push_back(seg);
      }
    }

    fo.area = 0.5 * poly.value() / ff.normal[p] + caps.value();
    fo.boundary_integral = bint.value();
    fo.support_area = supp.value();
    face_area_ = face_area;
    return fo;
  }

  double last_face_area() const { return face_area_; }

 private:
  /// Gauss-Legendre rule accessor with stable references.
  class GaussRule {
   public:
    explicit GaussRule(int n) : r_(gauss_legendre(n)) {}
    int size() const { return r_.order; }
    double node(int i) const { return r_.nodes[static_cast<std::size_t>(i)]; }
    double weight(int i) const { return r_.weights[static_cast<std::size_t>(i)]; }

   private:
    const QuadratureRule& r_;
  };

  const EdgeEntry& edge(int va, int vb) {
    for (const EdgeEntry& e : edges_)
      if ((e.a == va && e.b == vb) || (e.a == vb && e.b == va)) return e;
    int a = va, b = vb;
    if (lex_less(cell_.vertices[static_cast<std::size_t>(b)], cell_.vertices[static_cast<std::size_t>(a)])) std::swap(a, b);
    edges_.push_back({a, b, edge_clip(f_, cell_.vertices[static_cast<std::size_t>(a)], cell_.vertices[static_cast<std::size_t>(b)],
                                      values_[static_cast<std::size_t>(a)])});
    return edges_.back();
  }

  template <class Arc>
  void pair_crossings(const FaceConic& conic, std::vector<Crossing>& xs, const std::vector<Vec2>& uverts,
                      std::vector<Arc>& arcs, std::size_t k) {
    // Residual audit: crossings must lie on the conic.
    double ext = 0.0;
    for (const Vec2& u : uverts) ext = std::max(ext, norm(u));
    const double scale = std::abs(conic.a) + norm(conic.avec) * ext +
                         (std::abs(conic.A(0, 0)) + 2.0 * std::abs(conic.A(0, 1)) + std::abs(conic.A(1, 1))) * ext * ext;
    for (Crossing& c : xs) {
      const double res = std::abs(conic.value(c.u));
      if (res > 1e-8 * scale)
        throw NumericalError("inconsistent intersection (face " + std::to_string(k) + ", residual " + std::to_string(res) + ")");
      c.component = conic.component(c.u);
      c.s = conic.parameter(c.u);
    }
    const bool cyclic = conic.cls == ConicClass::Elliptic;
    for (int comp = 0; comp < conic.component_count(); ++comp) {
      const double dir = conic.direction(comp);
      std::vector<const Crossing*> seq;
      for (const Crossing& c : xs)
        if (c.component == comp) seq.push_back(&c);
      if (seq.empty()) continue;
      std::stable_sort(seq.begin(), seq.end(), [dir](const Crossing* x, const Crossing* y) { return dir * x->s < dir * y->s; });

      auto alternates = [&](std::size_t start) {
        if (seq.size() % 2 != 0) return false;
        for (std::size_t i = 0; i < seq.size(); ++i) {
          const CrossingKind want = (i % 2 == 0) ? CrossingKind::Leaving : CrossingKind::Entering;
          if (seq[(start + i) % seq.size()]->kind != want) return false;
        }
        return true;
      };
      auto find_start = [&]() -> std::ptrdiff_t {
        if (!cyclic) return alternates(0) ? 0 : -1;
        for (std::size_t s = 0; s < seq.size(); ++s)
          if (seq[s]->kind == CrossingKind::Leaving && alternates(s)) return static_cast<std::ptrdiff_t>(s);
        return -1;
      };
      std::ptrdiff_t start = find_start();
      if (start < 0) {
        // Repair ordering ties: swap neighbours whose parameters agree to
        // rounding and whose kinds are out of order.
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
          const double si = dir * seq[i]->s, sj = dir * seq[i + 1]->s;
          if (seq[i]->kind != seq[i + 1]->kind && std::abs(sj - si) <= 1e-9 * (1.0 + std::abs(si))) {
            std::swap(seq[i], seq[i + 1]);
            ++i;
          }
        }
        start = find_start();
      }
      if (start < 0) {
        std::string dump = "intersection pairing failed (face " + std::to_string(k) + ", class " +
                           to_string(conic.cls) + ", component " + std::to_string(comp) + "):";
        for (const Crossing* c : seq) dump += std::string(" ") + (c->kind == CrossingKind::Leaving ? "L" : "E") + "@" + std::to_string(c->s);
        throw NumericalError(dump);
      }
      for (std::size_t i = 0; i < seq.size(); i += 2) {
        const Crossing& L = *seq[(static_cast<std::size_t>(start) + i) % seq.size()];
        const Crossing& E = *seq[(static_cast<std::size_t>(start) + i + 1) % seq.size()];
        double delta;
        double s0 = L.s;
        switch (conic.cls) {
          case ConicClass::Elliptic: {
            delta = dir * wrap_positive(dir * (E.s - L.s));
            if (seq.size() == 2 && (std::abs(delta) < 1e-6 || std::abs(delta) > 2.0 * std::numbers::pi - 1e-6)) {
              // Nearly coincident crossings: the arc is either a sliver or
              // almost the whole ellipse. The long arc lies inside the face
              // exactly when its far point does.
              const double mid_long = L.s + dir * std::numbers::pi;
              const bool long_inside = point_in_polygon(uverts, conic.point(comp, mid_long));
              const double rho = std::hypot(conic.displacement_to_working(E.u - L.u).x / (2.0 * conic.p),
                                            conic.displacement_to_working(E.u - L.u).y / (2.0 * conic.q));
              const double short_arc = 2.0 * std::asin(std::min(rho, 1.0));
              delta = dir * (long_inside ? 2.0 * std::numbers::pi - short_arc : short_arc);
            }
            break;
          }
          case ConicClass::Parabolic: delta = dot(E.u - L.u, conic.r1); break;
          case ConicClass::ParallelLines: delta = dot(E.u - L.u, conic.r2); break;
          case ConicClass::Linear: delta = dot(E.u - L.u, conic.e); break;
          default: delta = E.s - L.s; break;
        }
        arcs.push_back({comp, s0, delta, L.x, E.x, L.u, E.u, false});
      }
    }
  }

  const Polyhedron& cell_;
  const ParaboloidFrame& f_;
  const ClipOptions& opt_;
  ClipResult& out_;
  StageClock clock_;
  std::vector<double> values_;
  std::vector<EdgeEntry> edges_;
  double diameter_ = 0.0;
  double face_area_ = 0.0;
};

}  // namespace detail

/// Volume of the part of `cell` where the paraboloid level set is <= 0.
inline ClipResult clip_volume(const Polyhedron& cell, const ParaboloidFrame& frame, const ClipOptions& opt = {}) {
  if (opt.quadrature_nodes < 1 || opt.quadrature_nodes > kMaxQuadratureOrder)
    throw ParameterError("quadrature node count must lie in [1, 64]");
  const ParaboloidFrame f = frame.folded();
  ClipResult out;
  out.face_areas.resize(cell.faces.size());
  out.face_classes.resize(cell.faces.size());
  detail::CellClipper clipper(cell, f, opt, out);
  CompensatedSum vol, supp;
  for (std::size_t k = 0; k < cell.faces.size(); ++k) {
    detail::FaceOutput fo;
    try {
      fo = clipper.face(k);
    } catch (const NumericalError& e) {
      const std::string msg = e.what();
      throw NumericalError(msg.find("face ") != std::string::npos ? msg : "face " + std::to_string(k) + ": " + msg);
    } catch (const GeometryError& e) {
      throw GeometryError("face " + std::to_string(k) + ": " + e.what());
    }
    out.face_areas[k] = fo.area;
    out.face_classes[k] = fo.cls;
    ++out.diagnostics.face_classes[static_cast<int>(fo.cls)];
    const Vec3& x1 = cell.vertices[static_cast<std::size_t>(cell.faces[k][0])];
    const Vec3 n = normalized(cell.face_area_vector(k));
    vol += dot(x1 - f.base, n) * fo.area;
    vol += fo.boundary_integral;
    supp += fo.support_area;
  }
  out.volume = vol.value() / 3.0;
  out.support_area = supp.value();
  return out;
}

/// Volumes below and above the paraboloid.
inline std::pair<double, double> clip_complement_check(const Polyhedron& cell, const ParaboloidFrame& frame,
                                                       const ClipOptions& opt = {}) {
  return {clip_volume(cell, frame, opt).volume, clip_volume(cell, frame.complement(), opt).volume};
}

}  // namespace paraclip
