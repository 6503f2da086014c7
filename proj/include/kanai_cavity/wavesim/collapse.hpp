#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kanai_cavity/error.hpp"
#include "kanai_cavity/schedule.hpp"
#include "kanai_cavity/wavesim/field.hpp"
#include "kanai_cavity/wavesim/fresnel.hpp"
#include "kanai_cavity/wavesim/gaussian.hpp"
#include "kanai_cavity/wavesim/split_step.hpp"

namespace kanai_cavity {

enum class WaveEngine { fresnel, split_step, gaussian_q };

inline const char* to_string(WaveEngine e) {
  switch (e) {
    case WaveEngine::fresnel:
      return "fresnel";
    case WaveEngine::split_step:
      return "split_step";
    case WaveEngine::gaussian_q:
      return "gaussian_q";
  }
  return "?";
}

inline WaveEngine engine_from_string(const std::string& s) {
  if (s == "fresnel") return WaveEngine::fresnel;
  if (s == "split_step") return WaveEngine::split_step;
  if (s == "gaussian_q") return WaveEngine::gaussian_q;
  throw ValidationError("unknown wave engine: " + s);
}

struct CollapseRow {
  std::size_t n = 0;
  double w1 = 0.0;
  double w2 = 0.0;
  double norm = 0.0;
  double centroid = 0.0;
  /// Spot sizes of the TEM00 mode of the cavity frozen at round trip n.
  double w1_mode = 0.0;
  double w2_mode = 0.0;
};

struct CollapseTrace {
  WaveEngine engine = WaveEngine::gaussian_q;
  std::vector<CollapseRow> rows;
  bool truncated = false;
  std::string diagnostic;
  /// First round trip at which a fixed-grid engine under-resolves the spot.
  std::optional<std::size_t> resolution_warning_n;
};

struct CollapseOptions {
  WaveEngine engine = WaveEngine::gaussian_q;
  std::size_t n_max = 0;
  std::size_t grid_n = 4096;
  /// Window width in units of the initial spot size.
  double window_factor = 16.0;
  std::size_t substeps = 8;
  SplitScheme scheme = SplitScheme::exact_quadratic;
  /// Split-step results are trusted while w1 >= min_pixels_per_spot * dx.
  double min_pixels_per_spot = 8.0;
  FresnelOptions fresnel{};
  /// Called with every left-mirror field of a grid engine.
  std::function<void(std::size_t, const ComplexField&)> on_field;
};

/// Grid on which a run starting from `beam` is sampled.
inline Grid1D collapse_grid(const GaussianBeam& beam, double wavelength, const CollapseOptions& o) {
  if (!is_power_of_two(o.grid_n)) throw ValidationError("collapse: grid_n must be a power of two");
  if (!(o.window_factor > 0.0)) throw ValidationError("collapse: window_factor must be > 0");
  const double w = beam.spot_size(wavelength);
  return Grid1D::centered(o.grid_n, o.window_factor * w / static_cast<double>(o.grid_n));
}

namespace detail {

inline void fill_mode_columns(const MirrorSchedule& sched, double wavelength, CollapseRow& row) {
  const double nn = static_cast<double>(row.n);
  const Complex qm = eigenmode_q(sched.matrix_at(nn));
  row.w1_mode = spot_size_from_q(qm, wavelength);
  row.w2_mode = spot_size_from_q(sched.half_trip_at(nn).transform_q(qm), wavelength);
}

inline CollapseTrace run_collapse_analytic(const MirrorSchedule& sched, GaussianBeam beam,
                                           double wavelength, const CollapseOptions& o) {
  CollapseTrace trace;
  trace.engine = WaveEngine::gaussian_q;
  for (std::size_t n = 0; n <= o.n_max; ++n) {
    if (n > 0) beam = beam.transformed(sched.trip_matrix(n));
    CollapseRow row;
    row.n = n;
    row.w1 = beam.spot_size(wavelength);
    row.w2 = beam.transformed(sched.half_trip_at(static_cast<double>(n))).spot_size(wavelength);
    row.norm = beam.norm_squared(wavelength);
    row.centroid = beam.center;
    fill_mode_columns(sched, wavelength, row);
    trace.rows.push_back(row);
  }
  return trace;
}

}  // namespace detail

/// Grid engines starting from an arbitrary sampled field.
inline CollapseTrace run_collapse(const MirrorSchedule& sched, ComplexField field0,
                                  const CollapseOptions& o) {
  if (o.engine == WaveEngine::gaussian_q) {
    throw ValidationError("collapse: the gaussian_q engine needs a GaussianBeam start");
  }
  field0.validate();
  const double lam = field0.wavelength;
  CollapseTrace trace;
  trace.engine = o.engine;
  FresnelOptions fo = o.fresnel;
  FresnelPropagator fresnel(fo);
  FresnelOptions right_opts = fo;
  right_opts.output_plane = PlaneTag::right_mirror;
  FresnelPropagator to_right(right_opts);
  SplitStepPropagator split(o.scheme);

  ComplexField psi = std::move(field0);
  for (std::size_t n = 0; n <= o.n_max; ++n) {
    try {
      if (n > 0) {
        const AbcdMatrix m = sched.trip_matrix(n);
        if (o.engine == WaveEngine::fresnel) {
          psi = fresnel.apply(psi, m, PlaneTag::left_mirror);
        } else {
          psi = split.apply(psi, sched.theta(), m.b, m.c, o.substeps);
        }
      }
      const FieldMoments mo = field_moments(psi);
      CollapseRow row;
      row.n = n;
      row.w1 = 2.0 * mo.stddev;
      row.norm = mo.norm;
      row.centroid = mo.mean;
      const ComplexField right = to_right.apply(psi, sched.half_trip_at(static_cast<double>(n)));
      row.w2 = spot_size(right);
      detail::fill_mode_columns(sched, lam, row);
      if (o.engine == WaveEngine::split_step && !trace.resolution_warning_n &&
          row.w1 < o.min_pixels_per_spot * psi.dx) {
        trace.resolution_warning_n = n;
      }
      trace.rows.push_back(row);
      if (o.on_field) o.on_field(n, psi);
    } catch (const SamplingError& e) {
      trace.truncated = true;
      trace.diagnostic = "round trip " + std::to_string(n) + ": " + e.what() +
                         " (suggested N = " + std::to_string(e.suggested_n()) + ")";
      break;
    }
  }
  return trace;
}

/// Any engine starting from a Gaussian beam. Grid engines sample it on a
/// centered window of window_factor spot sizes.
inline CollapseTrace run_collapse(const MirrorSchedule& sched, const GaussianBeam& beam0,
                                  double wavelength, const CollapseOptions& o) {
  beam0.validate();
  if (o.engine == WaveEngine::gaussian_q) {
    return detail::run_collapse_analytic(sched, beam0, wavelength, o);
  }
  return run_collapse(sched, beam0.sample(collapse_grid(beam0, wavelength, o), wavelength), o);
}

/// Unit-power TEM00 mode of the initial cavity, optionally displaced.
inline GaussianBeam initial_eigenmode(const MirrorSchedule& sched, double wavelength,
                                      double displacement = 0.0) {
  return GaussianBeam::normalized(eigenmode_q(sched.matrix_at(0.0)), wavelength, displacement);
}

}  // namespace kanai_cavity
