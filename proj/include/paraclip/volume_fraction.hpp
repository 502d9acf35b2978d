#pragma once

// Cell-wise volume fractions of a level-set interior on a polyhedral mesh.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "paraclip/clipper.hpp"
#include "paraclip/core_math.hpp"
#include "paraclip/errors.hpp"
#include "paraclip/levelset.hpp"
#include "paraclip/mesh.hpp"
#include "paraclip/surface_approx.hpp"

namespace paraclip {

enum class ApproximationMode { Quadratic, Linear };

inline int default_thread_count() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

/// Runs body(i, worker) for i in [0, n) on contiguous blocks, one per worker.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i, std::size_t{0});
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
        for (std::size_t i = lo; i < hi; ++i) body(i, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct CellFault {
  std::size_t cell = 0;
  std::string message;
};

struct InitOptions {
  ApproximationMode mode = ApproximationMode::Quadratic;
  int threads = 1;
  int quadrature_nodes = 5;
  bool collect_timing = false;
  bool keep_frames = false;  ///< store the paraboloid of every intersected cell
};

struct VolumeFractionField {
  std::vector<double> alpha;
  std::vector<CellStatus> status;
  std::vector<double> cell_volume;
  std::vector<ParaboloidFrame> frames;  ///< per cell, only with keep_frames
  std::size_t n_intersected = 0;
  std::vector<CellFault> faults;
  StageTimers timers;
  double wall_seconds = 0.0;

  bool ok() const { return faults.empty(); }

  /// Interior volume sum in cell order (bitwise independent of threading).
  double interior_volume() const {
    CompensatedSum s;
    for (std::size_t i = 0; i < alpha.size(); ++i) s += cell_volume[i] * alpha[i];
    return s.value();
  }
};

inline constexpr double kFractionClamp = 1e-12;

inline VolumeFractionField init_volume_fractions(const PolyMesh& mesh, const LevelSetField& field,
                                                 const InitOptions& opt = {}) {
  const std::size_t n = mesh.cell_count();
  VolumeFractionField out;
  out.alpha.assign(n, 0.0);
  out.status.assign(n, CellStatus::Exterior);
  out.cell_volume.assign(n, 0.0);
  if (opt.keep_frames) out.frames.resize(n);
  const std::size_t workers = static_cast<std::size_t>(std::max(1, opt.threads));
  std::vector<StageTimers> timers(workers);
  std::vector<std::string> fault(n);
  std::vector<char> failed(n, 0);

  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(n, opt.threads, [&](std::size_t i, std::size_t w) {
    StageTimers* tm = opt.collect_timing ? &timers[w] : nullptr;
    try {
      const Polyhedron cell = mesh.cell(i);
      const double vol = cell.volume();
      out.cell_volume[i] = vol;
      StageClock clock(tm);
      const auto values = cell_vertex_values(cell, field);
      const CellStatus st = classify_values(values);
      out.status[i] = st;
      if (st != CellStatus::Intersected) {
        out.alpha[i] = st == CellStatus::Interior ? 1.0 : 0.0;
        return;
      }
      SurfaceApproximation sa = approximate_cell_surface(cell, values, field);
      if (opt.mode == ApproximationMode::Linear) sa.frame = sa.frame.linearized();
      if (opt.keep_frames) out.frames[i] = sa.frame;
      clock.mark(Stage::SurfaceApproximation);
      ClipOptions co;
      co.quadrature_nodes = opt.quadrature_nodes;
      co.timers = tm;
      double a = clip_volume(cell, sa.frame, co).volume / vol;
      if (a < 0.0 && a >= -kFractionClamp) a = 0.0;
      if (a > 1.0 && a <= 1.0 + kFractionClamp) a = 1.0;
      if (!(a >= 0.0 && a <= 1.0)) throw NumericalError("volume fraction " + std::to_string(a) + " outside [0, 1]");
      out.alpha[i] = a;
    } catch (const std::exception& e) {
      failed[i] = 1;
      fault[i] = e.what();
    }
  });
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (std::size_t i = 0; i < n; ++i) {
    if (out.status[i] == CellStatus::Intersected) ++out.n_intersected;
    if (failed[i]) out.faults.push_back({i, std::move(fault[i])});
  }
  for (const auto& t : timers) out.timers += t;
  return out;
}

/// |1 - sum_i |cell_i| alpha_i / V|.
inline double global_volume_error(const VolumeFractionField& f, double exact_volume) {
  if (!(exact_volume > 0.0)) throw ParameterError("exact volume must be positive");
  return std::abs(1.0 - f.interior_volume() / exact_volume);
}

}  // namespace paraclip
