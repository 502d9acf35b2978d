#pragma once

// Experiment drivers: mesh descriptors, convergence studies, the paraboloid
// sweep through the table polyhedron, and the timing breakdown.

#include <charconv>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "paraclip/clipper.hpp"
#include "paraclip/errors.hpp"
#include "paraclip/frame.hpp"
#include "paraclip/levelset.hpp"
#include "paraclip/mesh.hpp"
#include "paraclip/volume_fraction.hpp"
#include "paraclip/vtk_io.hpp"

namespace paraclip {

/// Locale-free shortest-roundtrip-safe formatting with 17 significant digits.
inline std::string format_real(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Meshes
// ---------------------------------------------------------------------------

/// cube:N=20, tet:N=15, table, vtk:path/to/file.vtk
inline PolyMesh make_mesh(std::string_view text) {
  if (text.starts_with("vtk:")) return read_vtk_legacy(std::string(text.substr(4)));
  const Descriptor d = parse_descriptor(text);
  if (d.kind == "table") return mesh_from_polyhedron(build_table_polyhedron(d.number("a", 0.25)));
  const long long n = d.integer("N");
  if (n < 1 || n > 1000) throw ParseError("mesh resolution N must lie in [1, 1000]");
  if (d.kind == "cube") return build_cube_mesh(static_cast<int>(n));
  if (d.kind == "tet") return build_tet_mesh(static_cast<int>(n));
  throw ParseError("unknown mesh kind '" + d.kind + "'");
}

struct MeshFamily {
  std::string kind;  ///< "cube" or "tet"
  std::vector<int> resolutions;

  PolyMesh build(int n) const { return kind == "cube" ? build_cube_mesh(n) : build_tet_mesh(n); }
};

/// cube:15:40:5 (first:last:step) or cube:15,20,25,30,40 (explicit list).
inline MeshFamily parse_mesh_family(std::string_view text) {
  MeshFamily f;
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ParseError("mesh family needs the form kind:first:last:step or kind:N1,N2,...");
  f.kind = std::string(text.substr(0, colon));
  if (f.kind != "cube" && f.kind != "tet") throw ParseError("unknown mesh family '" + f.kind + "'");
  const std::string_view rest = text.substr(colon + 1);
  auto to_int = [&](std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || v < 1)
      throw ParseError("mesh family: bad resolution '" + std::string(s) + "'");
    return v;
  };
  auto split = [](std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
      const auto next = s.find(sep, pos);
      out.push_back(s.substr(pos, next - pos));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    return out;
  };
  if (rest.find(',') != std::string_view::npos || rest.find(':') == std::string_view::npos) {
    for (auto s : split(rest, ',')) f.resolutions.push_back(to_int(s));
  } else {
    const auto parts = split(rest, ':');
    if (parts.size() != 3) throw ParseError("mesh family range needs first:last:step");
    const int first = to_int(parts[0]), last = to_int(parts[1]), step = to_int(parts[2]);
    if (last < first) throw ParseError("mesh family range is empty");
    for (int n = first; n <= last; n += step) f.resolutions.push_back(n);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Convergence
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  int n = 0;
  std::size_t cells = 0;
  std::size_t n_intersected = 0;
  double sqrt_n_intersected = 0.0;
  double error = 0.0;
  double order = std::nan("");  ///< against the previous row
  double seconds = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  double slope = std::nan("");  ///< least-squares slope of log E_V over log sqrt(N_S)
  std::vector<CellFault> faults;
  std::vector<int> fault_resolution;
};

/// Least-squares slope of log y over log x.
inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("slope fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw ParameterError("slope fit needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

inline ConvergenceResult convergence_study(const LevelSetField& field, const MeshFamily& family, const InitOptions& opt = {}) {
  if (family.resolutions.size() < 3) throw ParameterError("a convergence study needs at least three resolutions");
  const auto exact = field.enclosed_volume();
  if (!exact) throw ParameterError("surface has no closed-form enclosed volume");
  ConvergenceResult out;
  for (int n : family.resolutions) {
    const PolyMesh mesh = family.build(n);
    const VolumeFractionField vf = init_volume_fractions(mesh, field, opt);
    if (vf.n_intersected == 0) throw NumericalError("surface not resolved at N=" + std::to_string(n));
    for (const auto& f : vf.faults) {
      out.faults.push_back(f);
      out.fault_resolution.push_back(n);
    }
    ConvergenceRow r;
    r.n = n;
    r.cells = mesh.cell_count();
    r.n_intersected = vf.n_intersected;
    r.sqrt_n_intersected = std::sqrt(static_cast<double>(vf.n_intersected));
    r.error = global_volume_error(vf, *exact);
    r.seconds = vf.wall_seconds;
    if (!out.rows.empty()) {
      const ConvergenceRow& p = out.rows.back();
      r.order = -std::log(r.error / p.error) / std::log(r.sqrt_n_intersected / p.sqrt_n_intersected);
    }
    out.rows.push_back(r);
  }
  std::vector<double> x, y;
  for (const auto& r : out.rows) {
    x.push_back(r.sqrt_n_intersected);
    y.push_back(r.error);
  }
  bool positive = true;
  for (double e : y) positive = positive && e > 0.0;
  if (positive) out.slope = log_log_slope(x, y);
  return out;
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceResult& r) {
  os << "N,cells,n_intersected,sqrt_n_intersected,error,order\n";
  for (const auto& row : r.rows)
    os << row.n << ',' << row.cells << ',' << row.n_intersected << ',' << format_real(row.sqrt_n_intersected) << ','
       << format_real(row.error) << ',' << (std::isnan(row.order) ? std::string() : format_real(row.order)) << '\n';
}

// ---------------------------------------------------------------------------
// Paraboloid family through the table polyhedron
// ---------------------------------------------------------------------------

inline constexpr double kSweepMin = -1.0;
inline constexpr double kSweepMax = 1.5;

/// Paraboloid with base (1,1,1)/2, normal (4,-7,2)/sqrt(69),
/// tangents (-8,14,65)/sqrt(4485) and (-7,-4,0)/sqrt(65), kappa = (-19/4, 0).
inline ParaboloidFrame sweep_frame(double s = 0.0) {
  ParaboloidFrame f;
  f.base = {0.5, 0.5, 0.5};
  f.n0 = Vec3{4.0, -7.0, 2.0} / std::sqrt(69.0);
  f.tau1 = Vec3{-8.0, 14.0, 65.0} / std::sqrt(4485.0);
  f.tau2 = Vec3{-7.0, -4.0, 0.0} / std::sqrt(65.0);
  f.kappa1 = -19.0 / 4.0;
  f.kappa2 = 0.0;
  f.kappa12 = 0.0;
  f.shift = s;
  return f;
}

struct SweepSample {
  double s = 0.0;
  double rho = 0.0;
  double drho_ds = 0.0;
  double support_area = 0.0;
};

inline std::vector<SweepSample> paraboloid_sweep(int steps, const Polyhedron& cell = build_table_polyhedron(),
                                                 double s_min = kSweepMin, double s_max = kSweepMax,
                                                 int quadrature_nodes = 5) {
  if (steps < 2) throw ParameterError("sweep needs at least two steps");
  const double vol = cell.volume();
  ClipOptions co;
  co.quadrature_nodes = quadrature_nodes;
  std::vector<SweepSample> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    // Endpoints are hit exactly.
    const double s = i == steps - 1 ? s_max : s_min + (s_max - s_min) * i / (steps - 1);
    const ClipResult r = clip_volume(cell, sweep_frame(s), co);
    out[static_cast<std::size_t>(i)] = {s, r.volume / vol, r.support_area / vol, r.support_area};
  }
  return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepSample>& rows) {
  os << "s,rho,drho_ds,supp_area\n";
  for (const auto& r : rows)
    os << format_real(r.s) << ',' << format_real(r.rho) << ',' << format_real(r.drho_ds) << ','
       << format_real(r.support_area) << '\n';
}

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

struct TimingShare {
  Stage stage;
  double percent = 0.0;
  double microseconds_per_cell = 0.0;
};

inline std::vector<TimingShare> timing_report(const StageTimers& t, std::size_t n_intersected) {
  const double total = std::accumulate(t.seconds.begin(), t.seconds.end(), 0.0);
  std::vector<TimingShare> out;
  for (int i = 0; i < kStageCount; ++i) {
    TimingShare s{static_cast<Stage>(i)};
    s.percent = total > 0.0 ? 100.0 * t.seconds[static_cast<std::size_t>(i)] / total : 0.0;
    s.microseconds_per_cell =
        n_intersected > 0 ? 1e6 * t.seconds[static_cast<std::size_t>(i)] / static_cast<double>(n_intersected) : 0.0;
    out.push_back(s);
  }
  return out;
}

inline void write_timing_report(std::ostream& os, const std::vector<TimingShare>& shares) {
  os << "stage,percent,us_per_cell\n";
  for (const auto& s : shares) {
    char pct[32], us[32];
    std::snprintf(pct, sizeof pct, "%.2f", s.percent);
    std::snprintf(us, sizeof us, "%.3f", s.microseconds_per_cell);
    os << to_string(s.stage) << ',' << pct << ',' << us << '\n';
  }
}

}  // namespace paraclip
