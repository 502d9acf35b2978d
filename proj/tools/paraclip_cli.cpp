// Command-line front end: volume-fraction initialization, convergence studies,
// the table sweep and single-cell clipping.
//
// Exit codes: 0 success, 1 usage or input error, 2 kernel faults.

#include <array>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "paraclip/paraclip.hpp"

namespace {

using namespace paraclip;

constexpr int kExitUsage = 1;
constexpr int kExitFault = 2;

struct KernelFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  return out;
}

// "-" means standard output.
template <class Write>
void write_to(const std::string& path, Write&& write) {
  if (path == "-") {
    write(std::cout);
    return;
  }
  auto out = open_output(path);
  write(out);
}

void report_faults(const std::vector<CellFault>& faults, std::ostream& err, const std::string& prefix = "") {
  const std::size_t shown = std::min<std::size_t>(faults.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) err << "fault: " << prefix << "cell " << faults[i].cell << ": " << faults[i].message << '\n';
  if (faults.size() > shown) err << "fault: ... " << faults.size() - shown << " more\n";
}

Vec3 to_vec3(const std::vector<double>& v) { return {v.at(0), v.at(1), v.at(2)}; }

Polyhedron load_cell(const std::string& spec) {
  if (spec == "table") return build_table_polyhedron();
  if (spec == "cube") return build_cube_mesh(1, Box{{0, 0, 0}, {1, 1, 1}}).cell(0);
  if (spec == "tet") return build_tet_mesh(1, Box{{0, 0, 0}, {1, 1, 1}}).cell(0);
  return read_cell_json(spec);
}

struct InitArgs {
  std::string mesh, surface, out_vtk, out_csv, out_timing;
  bool linear = false, timing = false;
  int threads = default_thread_count(), quad = 5;
};

int run_init(const InitArgs& a) {
  const PolyMesh mesh = make_mesh(a.mesh);
  const auto field = make_surface(a.surface);
  InitOptions opt;
  opt.mode = a.linear ? ApproximationMode::Linear : ApproximationMode::Quadratic;
  opt.threads = a.threads;
  opt.quadrature_nodes = a.quad;
  opt.collect_timing = a.timing || !a.out_timing.empty();
  const VolumeFractionField vf = init_volume_fractions(mesh, *field, opt);

  std::cout << "cells " << mesh.cell_count() << "\nintersected " << vf.n_intersected << "\ninterior_volume "
            << format_real(vf.interior_volume()) << '\n';
  if (auto exact = field->enclosed_volume())
    std::cout << "exact_volume " << format_real(*exact) << "\nvolume_error " << format_real(global_volume_error(vf, *exact))
              << '\n';
  std::cout << "seconds " << vf.wall_seconds << '\n';

  if (!a.out_vtk.empty()) {
    std::vector<double> status(vf.status.size());
    for (std::size_t i = 0; i < status.size(); ++i) status[i] = static_cast<double>(vf.status[i]);
    write_to(a.out_vtk, [&](std::ostream& out) { write_vtk(out, mesh, {{"alpha", vf.alpha}, {"status", status}}); });
  }
  if (!a.out_csv.empty()) {
    write_to(a.out_csv, [&](std::ostream& out) {
      out << "cell,status,alpha,volume\n";
      for (std::size_t i = 0; i < vf.alpha.size(); ++i)
        out << i << ',' << to_string(vf.status[i]) << ',' << format_real(vf.alpha[i]) << ','
            << format_real(vf.cell_volume[i]) << '\n';
    });
  }
  if (opt.collect_timing) {
    const auto shares = timing_report(vf.timers, vf.n_intersected);
    write_to(a.out_timing.empty() ? "-" : a.out_timing, [&](std::ostream& out) { write_timing_report(out, shares); });
  }
  if (!vf.ok()) {
    report_faults(vf.faults, std::cerr);
    return kExitFault;
  }
  return 0;
}

struct ConvergenceArgs {
  std::string surface, family, out;
  bool linear = false;
  int threads = default_thread_count(), quad = 5;
};

int run_convergence(const ConvergenceArgs& a) {
  const auto field = make_surface(a.surface);
  const MeshFamily family = parse_mesh_family(a.family);
  InitOptions opt;
  opt.mode = a.linear ? ApproximationMode::Linear : ApproximationMode::Quadratic;
  opt.threads = a.threads;
  opt.quadrature_nodes = a.quad;
  const ConvergenceResult r = convergence_study(*field, family, opt);
  write_to(a.out.empty() ? "-" : a.out, [&](std::ostream& out) { write_convergence_csv(out, r); });
  std::cerr << "slope " << format_real(r.slope) << '\n';
  if (!r.faults.empty()) {
    for (std::size_t i = 0; i < r.faults.size() && i < 20; ++i)
      std::cerr << "fault: N=" << r.fault_resolution[i] << " cell " << r.faults[i].cell << ": " << r.faults[i].message << '\n';
    return kExitFault;
  }
  return 0;
}

struct SweepArgs {
  std::string out;
  int steps = 500, quad = 5;
};

int run_sweep(const SweepArgs& a) {
  const auto rows = paraboloid_sweep(a.steps, build_table_polyhedron(), kSweepMin, kSweepMax, a.quad);
  write_to(a.out.empty() ? "-" : a.out, [&](std::ostream& out) { write_sweep_csv(out, rows); });
  return 0;
}

struct ClipOneArgs {
  std::string cell = "cube";
  std::vector<double> base{0.5, 0.5, 0.5}, normal{0, 0, 1}, tau1{1, 0, 0};
  double kappa1 = 0.0, kappa2 = 0.0, kappa12 = 0.0, shift = 0.0;
  int quad = 5;
  bool segments = false;
};

int run_clip_one(const ClipOneArgs& a) {
  const Polyhedron cell = load_cell(a.cell);
  ParaboloidFrame f = ParaboloidFrame::from_normal_tangent(to_vec3(a.base), to_vec3(a.normal), to_vec3(a.tau1), a.kappa1,
                                                           a.kappa2, a.shift);
  f.kappa12 = a.kappa12;
  ClipOptions co;
  co.quadrature_nodes = a.quad;
  co.keep_segments = a.segments;
  const ClipResult r = clip_volume(cell, f, co);
  const double vol = cell.volume();

  nlohmann::ordered_json j;
  j["volume"] = r.volume;
  j["cell_volume"] = vol;
  j["fraction"] = r.volume / vol;
  j["support_area"] = r.support_area;
  j["face_areas"] = r.face_areas;
  std::vector<std::string> classes;
  for (ConicClass c : r.face_classes) classes.emplace_back(to_string(c));
  j["face_classes"] = classes;
  j["enclosed_ellipses"] = r.diagnostics.enclosed_ellipses;
  j["orientation_disagreements"] = r.diagnostics.orientation_disagreements;
  if (a.segments) {
    j["segments"] = nlohmann::ordered_json::array();
    for (const auto& s : r.segments)
      j["segments"].push_back({{"face", s.face},
                               {"class", to_string(s.cls)},
                               {"start", {s.start.x, s.start.y, s.start.z}},
                               {"end", {s.end.x, s.end.y, s.end.z}},
                               {"closed", s.closed},
                               {"cap", s.cap}});
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volume fractions of polyhedral cells cut by implicit surfaces"};
  app.require_subcommand(1);

  InitArgs ia;
  auto* init = app.add_subcommand("init", "volume fractions of a level-set interior on a mesh");
  init->add_option("--mesh", ia.mesh, "cube:N=20 | tet:N=15 | table | vtk:path")->required();
  init->add_option("--surface", ia.surface, "sphere:r=0.8 | ellipsoid:a=,b=,c= | psphere:r=,L=,var=,seed= | plane:nx=,ny=,nz=,d=")
      ->required();
  init->add_flag("--linear", ia.linear, "planar instead of paraboloid approximation");
  init->add_option("--out-vtk", ia.out_vtk, "legacy VTK with alpha and status cell data");
  init->add_option("--out-csv", ia.out_csv, "per-cell CSV");
  init->add_flag("--timing", ia.timing, "print the per-stage time shares");
  init->add_option("--out-timing", ia.out_timing, "write the per-stage time shares as CSV");
  init->add_option("--threads", ia.threads, "worker threads")->check(CLI::PositiveNumber);
  init->add_option("--quad", ia.quad, "Gauss-Legendre nodes per arc piece")->check(CLI::Range(1, kMaxQuadratureOrder));

  ConvergenceArgs ca;
  auto* conv = app.add_subcommand("convergence", "global volume error over a mesh family");
  conv->add_option("--surface", ca.surface)->required();
  conv->add_option("--mesh-family", ca.family, "cube:15:40:5 | tet:10:35:5 | cube:15,20,25")->required();
  conv->add_flag("--linear", ca.linear);
  conv->add_option("--out", ca.out, "CSV path (stdout if omitted)");
  conv->add_option("--threads", ca.threads)->check(CLI::PositiveNumber);
  conv->add_option("--quad", ca.quad)->check(CLI::Range(1, kMaxQuadratureOrder));

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "shifted paraboloid family through the table polyhedron");
  sweep->add_option("--steps", sa.steps)->check(CLI::Range(2, 1000000));
  sweep->add_option("--out", sa.out, "CSV path (stdout if omitted)");
  sweep->add_option("--quad", sa.quad)->check(CLI::Range(1, kMaxQuadratureOrder));

  ClipOneArgs oa;
  auto* one = app.add_subcommand("clip-one", "clip one cell by one paraboloid, JSON on stdout");
  one->add_option("--cell", oa.cell, "cube | tet | table | path to cell JSON");
  one->add_option("--base", oa.base)->expected(3)->delimiter(',');
  one->add_option("--normal", oa.normal)->expected(3)->delimiter(',');
  one->add_option("--tau1", oa.tau1)->expected(3)->delimiter(',');
  one->add_option("--kappa1", oa.kappa1);
  one->add_option("--kappa2", oa.kappa2);
  one->add_option("--kappa12", oa.kappa12);
  one->add_option("--shift", oa.shift);
  one->add_option("--quad", oa.quad)->check(CLI::Range(1, kMaxQuadratureOrder));
  one->add_flag("--segments", oa.segments, "include the boundary arcs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (init->parsed()) return run_init(ia);
    if (conv->parsed()) return run_convergence(ca);
    if (sweep->parsed()) return run_sweep(sa);
    if (one->parsed()) return run_clip_one(oa);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFault;
  }
  return kExitUsage;
}
