#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kanai_cavity/core/oscillator.hpp"
#include "kanai_cavity/error.hpp"
#include "kanai_cavity/paraxial.hpp"
#include "kanai_cavity/raysim.hpp"
#include "kanai_cavity/schedule.hpp"
#include "kanai_cavity/wavesim/collapse.hpp"
#include "kanai_cavity/wavesim/field.hpp"
#include "kanai_cavity/wavesim/fresnel.hpp"
#include "kanai_cavity/wavesim/gaussian.hpp"
#include "kanai_cavity/wavesim/split_step.hpp"

namespace kanai_cavity {

/// Damped-oscillator constants emulated by a cavity: hbar = 1/k,
/// m = (1/theta) sqrt(-C(0)/B(0)), omega = theta, time = round-trip number.
struct QuantumParams {
  double hbar = 1.0;
  double mass = 1.0;
  double omega = 1.0;
};

inline QuantumParams map_parameters(const ResonatorGeometry& geom0, double wavelength) {
  if (!(wavelength > 0.0)) throw ValidationError("map_parameters: wavelength must be > 0");
  const AbcdMatrix m = round_trip_matrix(geom0);
  const StabilityInfo s = stability(m);
  if (!s.stable || s.marginal) {
    throw InvalidGeometry("map_parameters: mapping is undefined outside the open stability domain");
  }
  if (!(m.b < 0.0 && m.c > 0.0)) {
    // Lower domain: B > 0 would give the kinetic term the wrong sign.
    throw InvalidGeometry("map_parameters: geometry must lie in the upper stability domain");
  }
  const double theta = *s.theta;
  const double k = 2.0 * std::numbers::pi / wavelength;
  return {1.0 / k, std::sqrt(-m.c / m.b) / theta, theta};
}

/// -hbar e^-g / 2m and m omega^2 e^g / 2 hbar.
inline CavitySchrodingerCoefficients caldirola_kanai_coefficients(const QuantumParams& p,
                                                                  double g) {
  return {-p.hbar * std::exp(-g) / (2.0 * p.mass),
          p.mass * p.omega * p.omega * std::exp(g) / (2.0 * p.hbar)};
}

/// Normalized Gaussian: |phi|^2 has mean `center` and standard deviation
/// `width`; the carrier momentum is `momentum`.
struct GaussianWavepacket {
  double width = 1.0;
  double center = 0.0;
  double momentum = 0.0;

  void validate() const {
    if (!(width > 0.0) || !std::isfinite(width)) throw ValidationError("wavepacket: width must be > 0");
  }

  /// Minimum-uncertainty packet of the undamped oscillator.
  static GaussianWavepacket coherent(const QuantumParams& p, double center = 0.0,
                                     double momentum = 0.0) {
    return {std::sqrt(p.hbar / (2.0 * p.mass * p.omega)), center, momentum};
  }
};

/// Free-particle solution of i hbar dphi/dT = -(hbar^2/2m) d2phi/dX2. Defined
/// for every real T.
inline std::complex<double> free_gaussian(const GaussianWavepacket& pk, double X, double T,
                                          double hbar, double mass) {
  pk.validate();
  using C = std::complex<double>;
  const double d2 = pk.width * pk.width;
  const C spread(1.0, hbar * T / (2.0 * mass * d2));
  const double k0 = pk.momentum / hbar;
  const double v = pk.momentum / mass;
  const double shift = X - pk.center - v * T;
  const C expo = -shift * shift / (4.0 * d2 * spread) +
                 C(0.0, k0 * (X - pk.center) - 0.5 * k0 * v * T);
  return std::pow(2.0 * std::numbers::pi * d2, -0.25) / std::sqrt(spread) * std::exp(expo);
}

struct PacketMoments {
  double mean = 0.0;
  double width = 0.0;
};

/// Mean and width of the free packet at time T.
inline PacketMoments free_moments(const GaussianWavepacket& pk, double T, double hbar, double mass) {
  const double spread = hbar * T / (2.0 * mass * pk.width);
  return {pk.center + pk.momentum * T / mass, std::sqrt(pk.width * pk.width + spread * spread)};
}

inline constexpr double kCausticThreshold = 1e-12;

namespace detail {
inline ClassicalState away_from_caustic(const ClassicalSolution& sol, double n) {
  const ClassicalState st = sol(n);
  if (!(std::abs(st.u2) > kCausticThreshold)) {
    throw NearCausticError("u2(n) vanishes at n = " + std::to_string(n) +
                           "; the propagator is singular there");
  }
  return st;
}
}  // namespace detail

/// Exact damped-oscillator wavefunction
///   psi(x, n) = u2^{-1/2} exp[i m u2' x^2 / (2 hbar W u2)] phi(x/u2, u1/u2)
/// sampled on `grid`. The principal square root is used for u2 < 0.
inline ComplexField kanai_propagate(const GaussianWavepacket& pk, const ClassicalSolution& sol,
                                    const QuantumParams& p, const Grid1D& grid, double n,
                                    double wavelength = 1.0) {
  pk.validate();
  const ClassicalState st = detail::away_from_caustic(sol, n);
  const double w = st.wronskian();
  const double T = st.u1 / st.u2;
  const std::complex<double> pre = 1.0 / std::sqrt(std::complex<double>(st.u2, 0.0));
  const double chirp = p.mass * st.du2 / (2.0 * p.hbar * w * st.u2);
  ComplexField out{std::vector<Complex>(grid.count), grid.dx, grid.x0, wavelength,
                   PlaneTag::left_mirror};
  for (std::size_t j = 0; j < grid.count; ++j) {
    const double x = grid.x(j);
    out.samples[j] = pre * std::polar(1.0, chirp * x * x) *
                     free_gaussian(pk, x / st.u2, T, p.hbar, p.mass);
  }
  return out;
}

/// x(n) = u2 X(u1/u2), dx(n) = |u2| dX(u1/u2).
inline PacketMoments moments(const GaussianWavepacket& pk, const ClassicalSolution& sol,
                             const QuantumParams& p, double n) {
  pk.validate();
  const ClassicalState st = detail::away_from_caustic(sol, n);
  const PacketMoments free = free_moments(pk, st.u1 / st.u2, p.hbar, p.mass);
  return {st.u2 * free.mean, std::abs(st.u2) * free.width};
}

/// Classical solution with omega = theta and the schedule's friction.
inline ClassicalSolution schedule_solution(const MirrorSchedule& sched, double n_max) {
  OscillatorParams op{sched.theta(), sched.friction()};
  SolutionOptions so;
  so.n_max = n_max;
  return fundamental_solutions(op, so);
}

struct CrosscheckOptions {
  std::size_t n_max = 200;
  /// Initial displacement of the packet in units of the initial spot size.
  double displacement = 0.3;
  std::size_t grid_n = 4096;
  double window_factor = 16.0;
};

struct CrosscheckRow {
  std::size_t n = 0;
  double l2_distance = 0.0;
  double centroid_wave = 0.0;
  double centroid_analytic = 0.0;
  double centroid_ray = 0.0;
  double width_wave = 0.0;
  double width_analytic = 0.0;
};

struct CrosscheckReport {
  std::vector<CrosscheckRow> rows;
  double initial_spot = 0.0;
  double initial_displacement = 0.0;

  double max_l2_distance() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.l2_distance);
    return m;
  }

  /// Largest centroid disagreement among the three routes, relative to the
  /// initial displacement.
  double max_centroid_mismatch() const {
    if (initial_displacement == 0.0) return 0.0;
    double m = 0.0;
    for (const auto& r : rows) {
      m = std::max({m, std::abs(r.centroid_wave - r.centroid_analytic),
                    std::abs(r.centroid_wave - r.centroid_ray),
                    std::abs(r.centroid_analytic - r.centroid_ray)});
    }
    return m / std::abs(initial_displacement);
  }
};

/// Propagates one displaced TEM00 packet through the analytic damped-oscillator
/// propagator, the Fresnel round-trip engine and the ray map, and compares.
inline CrosscheckReport crosscheck_engines(const MirrorSchedule& sched, double wavelength,
                                           const CrosscheckOptions& o) {
  const QuantumParams p = map_parameters(sched.initial_geometry(), wavelength);
  const ClassicalSolution sol = schedule_solution(sched, static_cast<double>(o.n_max));
  const GaussianBeam beam0 = initial_eigenmode(sched, wavelength);
  const double w0 = beam0.spot_size(wavelength);
  const double x0 = o.displacement * w0;
  const GaussianBeam beam = GaussianBeam::normalized(beam0.q, wavelength, x0);
  const GaussianWavepacket pk{0.5 * w0, x0, 0.0};

  CollapseOptions co;
  co.engine = WaveEngine::fresnel;
  co.grid_n = o.grid_n;
  co.window_factor = o.window_factor;
  ComplexField psi = beam.sample(collapse_grid(beam, wavelength, co), wavelength);
  FresnelPropagator fresnel;
  RayState ray{x0, 0.0};

  CrosscheckReport rep;
  rep.initial_spot = w0;
  rep.initial_displacement = x0;
  for (std::size_t n = 0; n <= o.n_max; ++n) {
    if (n > 0) {
      const AbcdMatrix m = sched.trip_matrix(n);
      psi = fresnel.apply(psi, m, PlaneTag::left_mirror);
      ray = m(ray);
    }
    const double nn = static_cast<double>(n);
    const ComplexField ref = kanai_propagate(pk, sol, p, psi.grid(), nn, wavelength);
    const FieldMoments wave = field_moments(psi);
    const PacketMoments an = moments(pk, sol, p, nn);
    rep.rows.push_back({n, phase_aligned_distance(psi, ref), wave.mean, an.mean, ray.x, wave.stddev,
                        an.width});
  }
  return rep;
}

inline nlohmann::ordered_json to_json(const CrosscheckReport& r) {
  nlohmann::ordered_json j;
  j["initial_spot"] = r.initial_spot;
  j["initial_displacement"] = r.initial_displacement;
  j["max_l2_distance"] = r.max_l2_distance();
  j["max_centroid_mismatch"] = r.max_centroid_mismatch();
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"l2_distance", row.l2_distance},
                    {"centroid_wave", row.centroid_wave},
                    {"centroid_analytic", row.centroid_analytic},
                    {"centroid_ray", row.centroid_ray},
                    {"width_wave", row.width_wave},
                    {"width_analytic", row.width_analytic}});
  }
  j["rows"] = std::move(rows);
  return j;
}

}  // namespace kanai_cavity
