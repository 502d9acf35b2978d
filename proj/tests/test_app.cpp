#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "criteria.hpp"

using namespace paraclip;

TEST(Init, PlaneFieldMatchesHalfSpaceOracle) {
  const PlaneField p(normalized(Vec3{1, 2, -0.5}), 0.1);
  for (const PolyMesh& m : {build_cube_mesh(7), build_tet_mesh(5)}) {
    const auto vf = init_volume_fractions(m, p);
    ASSERT_TRUE(vf.ok());
    for (std::size_t i = 0; i < m.cell_count(); ++i) {
      const Polyhedron c = m.cell(i);
      const double ref = oracle::halfspace_volume(c, normalized(Vec3{1, 2, -0.5}), 0.1) / c.volume();
      EXPECT_NEAR(vf.alpha[i], ref, 1e-10);
    }
  }
}

TEST(Init, FractionsAreBoundedAndExactOffTheSurface) {
  const SphereField s({0.05, -0.02, 0.01}, 0.8);
  const auto vf = init_volume_fractions(build_cube_mesh(16), s);
  ASSERT_TRUE(vf.ok());
  std::size_t inside = 0;
  for (std::size_t i = 0; i < vf.alpha.size(); ++i) {
    EXPECT_GE(vf.alpha[i], 0.0);
    EXPECT_LE(vf.alpha[i], 1.0);
    if (vf.status[i] == CellStatus::Interior) {
      EXPECT_EQ(vf.alpha[i], 1.0);
      ++inside;
    }
    if (vf.status[i] == CellStatus::Exterior) {
      EXPECT_EQ(vf.alpha[i], 0.0);
    }
  }
  EXPECT_GT(inside, 0u);
  EXPECT_GT(vf.n_intersected, 0u);
  EXPECT_LT(global_volume_error(vf, *s.enclosed_volume()), 1e-3);
}

TEST(Init, ThreadCountDoesNotChangeResults) {
  const auto ps = sample_perturbed_sphere(0.8, 6, 5e-4, 1);
  const PolyMesh m = build_tet_mesh(12);
  InitOptions one;
  const auto a = init_volume_fractions(m, ps, one);
  for (int threads : {2, 3, 7}) {
    InitOptions opt;
    opt.threads = threads;
    const auto b = init_volume_fractions(m, ps, opt);
    ASSERT_EQ(a.alpha.size(), b.alpha.size());
    EXPECT_EQ(std::memcmp(a.alpha.data(), b.alpha.data(), a.alpha.size() * sizeof(double)), 0);
    const double va = a.interior_volume(), vb = b.interior_volume();
    EXPECT_EQ(std::memcmp(&va, &vb, sizeof va), 0);
  }
}

TEST(Init, LinearModeUsesTangentPlanes) {
  const SphereField s({0, 0, 0}, 0.8);
  InitOptions lin;
  lin.mode = ApproximationMode::Linear;
  lin.keep_frames = true;
  const PolyMesh m = build_cube_mesh(10);
  const auto vf = init_volume_fractions(m, s, lin);
  for (std::size_t i = 0; i < m.cell_count(); ++i) {
    if (vf.status[i] != CellStatus::Intersected) continue;
    EXPECT_EQ(vf.frames[i].kappa1, 0.0);
    EXPECT_EQ(vf.frames[i].kappa2, 0.0);
  }
  const auto quad = init_volume_fractions(m, s);
  EXPECT_GT(global_volume_error(vf, *s.enclosed_volume()), 10.0 * global_volume_error(quad, *s.enclosed_volume()));
}

TEST(Init, TimingSharesSumToOneHundred) {
  InitOptions opt;
  opt.collect_timing = true;
  const auto vf = init_volume_fractions(build_cube_mesh(12), SphereField({0, 0, 0}, 0.8), opt);
  const auto shares = timing_report(vf.timers, vf.n_intersected);
  ASSERT_EQ(shares.size(), static_cast<std::size_t>(kStageCount));
  double total = 0.0;
  for (const auto& s : shares) {
    EXPECT_GE(s.percent, 0.0);
    total += s.percent;
  }
  EXPECT_NEAR(total, 100.0, 1.0);
  std::ostringstream os;
  write_timing_report(os, shares);
  EXPECT_EQ(os.str().rfind("stage,percent,us_per_cell\nhypersurface approximation,", 0), 0u);
}

TEST(Init, GlobalVolumeError) {
  VolumeFractionField f;
  f.alpha = {1.0, 0.5};
  f.cell_volume = {0.5, 0.98};
  EXPECT_NEAR(global_volume_error(f, 1.0), 0.01, 1e-15);
  EXPECT_NEAR(global_volume_error(f, 0.99), 0.0, 1e-15);
  EXPECT_THROW(global_volume_error(f, 0.0), ParameterError);
}

TEST(Init, FaultsAreCollectedPerCell) {
  // A field whose curvature is undefined on a whole plane through the mesh.
  struct Kinked : LevelSetField {
    double value(const Vec3& x) const override { return std::abs(x.z) - 0.3; }
    FieldSample sample(const Vec3&) const override { throw NumericalError("no curvature here"); }
  } k;
  const auto vf = init_volume_fractions(build_cube_mesh(4), k);
  EXPECT_FALSE(vf.ok());
  EXPECT_EQ(vf.faults.size(), vf.n_intersected);
  EXPECT_NE(vf.faults.front().message.find("no curvature"), std::string::npos);
}

TEST(Experiments, MeshAndFamilyParsing) {
  EXPECT_EQ(make_mesh("cube:N=3").cell_count(), 27u);
  EXPECT_EQ(make_mesh("tet:N=2").cell_count(), 48u);
  EXPECT_EQ(make_mesh("table").cell_count(), 1u);
  EXPECT_NEAR(make_mesh("table:a=0.1").cell(0).volume(), 0.136, 1e-15);
  EXPECT_THROW(make_mesh("cube:N=0"), ParseError);
  EXPECT_THROW(make_mesh("cube:N=2.5"), ParseError);
  EXPECT_THROW(make_mesh("prism:N=3"), ParseError);

  const auto a = parse_mesh_family("cube:15:40:5");
  EXPECT_EQ(a.resolutions, (std::vector<int>{15, 20, 25, 30, 35, 40}));
  const auto b = parse_mesh_family("tet:10,20,35");
  EXPECT_EQ(b.resolutions, (std::vector<int>{10, 20, 35}));
  EXPECT_EQ(b.build(2).cell_count(), 48u);
  EXPECT_THROW(parse_mesh_family("cube"), ParseError);
  EXPECT_THROW(parse_mesh_family("hex:1:3:1"), ParseError);
  EXPECT_THROW(parse_mesh_family("cube:10:5:1"), ParseError);
  EXPECT_THROW(parse_mesh_family("cube:1:5:0"), ParseError);
}

TEST(Experiments, LogLogSlope) {
  std::vector<double> x, y;
  for (double n : {10.0, 20.0, 40.0}) {
    x.push_back(n);
    y.push_back(3.0 * std::pow(n, -4.0));
  }
  EXPECT_NEAR(log_log_slope(x, y), -4.0, 1e-12);
  EXPECT_THROW(log_log_slope({1.0}, {1.0}), ParameterError);
}

TEST(Experiments, ConvergenceStudyAndCsv) {
  const SphereField s({0, 0, 0}, 0.8);
  const auto r = convergence_study(s, parse_mesh_family("cube:8,12,16"));
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_TRUE(r.faults.empty());
  EXPECT_TRUE(std::isnan(r.rows[0].order));
  EXPECT_LT(r.slope, -2.5);
  std::ostringstream os;
  write_convergence_csv(os, r);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "N,cells,n_intersected,sqrt_n_intersected,error,order");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("8,512,", 0), 0u);
  EXPECT_EQ(line.back(), ',');  // first row has no order
  EXPECT_THROW(convergence_study(SphereField({0, 0, 0}, 0.01), parse_mesh_family("cube:2:4:1")), NumericalError);
  EXPECT_THROW(convergence_study(s, parse_mesh_family("cube:8,12")), ParameterError);
  EXPECT_THROW(convergence_study(PlaneField({0, 0, 1}, 0), parse_mesh_family("cube:2:4:1")), ParameterError);
}

TEST(Experiments, FormatRealRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) EXPECT_EQ(std::stod(format_real(x)), x);
  EXPECT_EQ(format_real(0.5), "0.5");
}

TEST(Sweep, EndpointsMonotoneAndCsv) {
  const auto rows = paraboloid_sweep(101);
  ASSERT_EQ(rows.size(), 101u);
  EXPECT_EQ(rows.front().s, kSweepMin);
  EXPECT_EQ(rows.back().s, kSweepMax);
  EXPECT_NEAR(rows.front().rho, 0.0, 1e-12);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    EXPECT_LE(rows[i].rho, rows[i + 1].rho + 1e-14);
    EXPECT_GE(rows[i].drho_ds, 0.0);
  }
  std::ostringstream os;
  write_sweep_csv(os, rows);
  EXPECT_EQ(os.str().rfind("s,rho,drho_ds,supp_area\n-1,0,", 0), 0u);
  EXPECT_THROW(paraboloid_sweep(1), ParameterError);
}

TEST(Sweep, DerivativeMatchesCentralDifferences) {
  const auto r = criteria::sweep(60, 1e-12, 1e-5);
  EXPECT_TRUE(r.derivative.pass) << "worst " << r.derivative.worst;
  EXPECT_TRUE(r.monotone);
  EXPECT_TRUE(r.endpoints_min);
  EXPECT_LT(r.quad_worst, 1e-12);
}
