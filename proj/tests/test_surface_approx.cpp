#include <gtest/gtest.h>

#include <map>
#include <random>
#include <tuple>

#include "oracles.hpp"
#include "paraclip/paraclip.hpp"

using namespace paraclip;

TEST(Classification, StatusFromVertexSigns) {
  SphereField s({0, 0, 0}, 0.8);
  const Polyhedron inside = build_cube_mesh(1, Box{{-0.1, -0.1, -0.1}, {0.1, 0.1, 0.1}}).cell(0);
  const Polyhedron outside = build_cube_mesh(1, Box{{0.9, 0.9, 0.9}, {1.0, 1.0, 1.0}}).cell(0);
  const Polyhedron cut = build_cube_mesh(1, Box{{0.7, -0.1, -0.1}, {0.9, 0.1, 0.1}}).cell(0);
  EXPECT_EQ(classify_cell(inside, s), CellStatus::Interior);
  EXPECT_EQ(classify_cell(outside, s), CellStatus::Exterior);
  EXPECT_EQ(classify_cell(cut, s), CellStatus::Intersected);
}

TEST(Classification, ExactZeroVertexCountsAsInterior) {
  PlaneField p({0, 0, 1}, 0.0);
  const Polyhedron c = build_cube_mesh(1, Box{{0, 0, 0}, {1, 1, 1}}).cell(0);
  const auto v = cell_vertex_values(c, p);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (c.vertices[i].z == 0.0) {
      EXPECT_LT(v[i], 0.0);
      EXPECT_GT(v[i], -1e-13);
    }
  }
  EXPECT_EQ(classify_values(v), CellStatus::Intersected);
}

TEST(EdgeRoot, SphereRootIsExact) {
  SphereField s({0, 0, 0}, 0.8);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const Vec3 u = oracle::random_unit(rng);
    const Vec3 p0 = 0.5 * u + 0.05 * oracle::random_unit(rng), p1 = 1.1 * u;
    const Vec3 r = edge_surface_root(p0, p1, s.value(p0), s.value(p1), s.gradient(p0), s.gradient(p1), s);
    EXPECT_NEAR(norm(r), 0.8, 2e-15);
    // On the segment.
    EXPECT_LT(norm(cross(r - p0, p1 - p0)), 1e-14);
  }
  EXPECT_THROW(edge_surface_root({0, 0, 0}, {0.1, 0, 0}, -1.0, -0.5, Vec3{1, 0, 0}, Vec3{1, 0, 0}, s), ParameterError);
}

TEST(EdgeRoot, VertexAtSingularPointOfTheField) {
  // The sphere distance has no gradient at its centre.
  SphereField s({0, 0, 0}, 0.8);
  const Vec3 p1{1, 1, 0};
  const Vec3 r = edge_surface_root({0, 0, 0}, p1, -0.8, s.value(p1), std::nullopt, s.gradient(p1), s);
  EXPECT_NEAR(norm(r), 0.8, 2e-15);
  const Polyhedron tet = build_tet_mesh(1).cell(0);
  const auto roots = cell_surface_roots(tet, cell_vertex_values(tet, SphereField(tet.vertices[0], 0.8)),
                                        SphereField(tet.vertices[0], 0.8));
  EXPECT_FALSE(roots.empty());
}

TEST(Projection, ReachesSurfaceAlongGivenDirection) {
  EllipsoidField e({0, 0, 0}, 0.75, 0.5, 0.25);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const Vec3 u = oracle::random_unit(rng);
    const Vec3 y0{0.7 * 0.75 * u.x, 0.7 * 0.5 * u.y, 0.7 * 0.25 * u.z};
    const Vec3 dir = e.gradient(y0);
    const auto r = project_to_surface(y0, dir, e);
    EXPECT_LE(std::abs(e.value(r.point)), 1e-14);
    EXPECT_LT(norm(cross(r.point - y0, normalized(dir))), 1e-12);
    EXPECT_LE(r.iterations, 50);
  }
  PlaneField p({0, 0, 1}, 0.5);
  EXPECT_THROW(project_to_surface({0, 0, 0}, {1, 0, 0}, p), NumericalError);
}

TEST(Weingarten, SphereAndEllipsoidCurvatures) {
  SphereField s({0.1, 0.2, 0.3}, 0.8);
  const auto f = weingarten_frame(s, Vec3{0.1, 0.2, 0.3} + 0.8 * normalized(Vec3{1, 2, -1}));
  EXPECT_NEAR(f.kappa1, -1.25, 1e-13);
  EXPECT_NEAR(f.kappa2, -1.25, 1e-13);
  EXPECT_LT(f.orthonormality_defect(), 1e-14);

  // At (a, 0, 0) the principal curvatures are -a/b^2 and -a/c^2.
  EllipsoidField e({0, 0, 0}, 0.75, 0.5, 0.25);
  const auto g = weingarten_frame(e, {0.75, 0, 0});
  EXPECT_NEAR(g.kappa1, -0.75 / 0.25, 1e-12);
  EXPECT_NEAR(g.kappa2, -0.75 / 0.0625, 1e-12);
  EXPECT_NEAR(std::abs(g.tau1.y), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(g.tau2.z), 1.0, 1e-12);
  EXPECT_NEAR(g.n0.x, 1.0, 1e-15);
}

TEST(Weingarten, FrameReproducesFieldToSecondOrder) {
  // lambda_frame and lambda agree to second order (up to the gradient scale).
  const auto ps = sample_perturbed_sphere(0.8, 6, 5e-4, 1);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    const Vec3 u = oracle::random_unit(rng);
    const auto pr = project_to_surface(0.8 * u, u, ps);
    const auto f = weingarten_frame(ps, pr.point);
    const double gn = norm(ps.gradient(pr.point));
    const Vec3 t = normalized(f.tau1 + 0.3 * f.tau2);
    double prev = 0.0;
    for (double h : {1e-2, 5e-3}) {
      // Walk along the surface: tangent step, then back onto the surface.
      const Vec3 y = pr.point + h * t;
      const auto q = project_to_surface(y, f.n0, ps);
      const double err = std::abs(f.value(q.point));
      if (prev > 0.0) {
        EXPECT_LT(err, prev / 5.0);  // third order in h (second order would give 4)
      }
      prev = err;
    }
    EXPECT_GT(gn, 0.0);
  }
}

TEST(CellApproximation, SphereCellsRecoverCurvature) {
  SphereField s({0, 0, 0}, 0.8);
  const PolyMesh m = build_cube_mesh(12);
  int n = 0;
  for (std::size_t i = 0; i < m.cell_count(); ++i) {
    const Polyhedron c = m.cell(i);
    if (classify_cell(c, s) != CellStatus::Intersected) continue;
    const auto sa = approximate_cell_surface(c, s);
    EXPECT_GE(sa.root_count, 3);
    EXPECT_FALSE(sa.normal_fallback);
    EXPECT_NEAR(norm(sa.frame.base), 0.8, 1e-14);
    EXPECT_NEAR(sa.frame.kappa1, -1.25, 1e-9);
    EXPECT_NEAR(sa.frame.kappa2, -1.25, 1e-9);
    ++n;
  }
  EXPECT_GT(n, 100);
  EXPECT_THROW(approximate_cell_surface(build_cube_mesh(1, Box{{0, 0, 0}, {0.1, 0.1, 0.1}}).cell(0), s), ParameterError);
}

TEST(CellApproximation, SharedEdgesGiveIdenticalRoots) {
  const auto ps = sample_perturbed_sphere(0.8, 3, 5e-4, 1);
  const PolyMesh m = build_tet_mesh(6);
  std::map<std::pair<int, int>, Vec3> seen;
  for (std::size_t i = 0; i < m.cell_count(); ++i) {
    const Polyhedron c = m.cell(i);
    const auto v = cell_vertex_values(c, ps);
    for (auto [a, b] : c.edges()) {
      if ((v[static_cast<std::size_t>(a)] < 0.0) == (v[static_cast<std::size_t>(b)] < 0.0)) continue;
      Vec3 pa = c.vertices[static_cast<std::size_t>(a)], pb = c.vertices[static_cast<std::size_t>(b)];
      double fa = v[static_cast<std::size_t>(a)], fb = v[static_cast<std::size_t>(b)];
      if (std::tie(pb.x, pb.y, pb.z) < std::tie(pa.x, pa.y, pa.z)) {
        std::swap(pa, pb);
        std::swap(fa, fb);
      }
      const Vec3 r = edge_surface_root(pa, pb, fa, fb, ps.gradient(pa), ps.gradient(pb), ps);
      // Key by rounded endpoint coordinates on the 6^3 grid.
      auto key = [](const Vec3& x) { return static_cast<int>(std::lround((x.x + 1) * 3)) + 100 * static_cast<int>(std::lround((x.y + 1) * 3)) + 10000 * static_cast<int>(std::lround((x.z + 1) * 3)); };
      const auto k = std::pair{key(pa), key(pb)};
      auto [it, fresh] = seen.emplace(k, r);
      if (!fresh) {
        EXPECT_EQ(it->second, r);
      }
    }
  }
  EXPECT_GT(seen.size(), 50u);
}
