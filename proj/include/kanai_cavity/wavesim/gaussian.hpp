#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "kanai_cavity/error.hpp"
#include "kanai_cavity/paraxial.hpp"
#include "kanai_cavity/schedule.hpp"
#include "kanai_cavity/wavesim/field.hpp"

namespace kanai_cavity {

/// Spot size from 1/q = 1/R - i lambda / (pi w^2).
inline double spot_size_from_q(Complex q, double wavelength) {
  const double im = (1.0 / q).imag();
  if (!(im < 0.0)) throw BeamParameterSingularity("beam parameter is not confined (Im q <= 0)");
  return std::sqrt(-wavelength / (std::numbers::pi * im));
}

/// Self-reproducing beam parameter of a canonical stable round trip.
inline Complex eigenmode_q(const AbcdMatrix& m) {
  if (!(m.b * m.c < 0.0)) throw NearInstabilityError("eigenmode needs b c < 0");
  return {0.0, std::sqrt(-m.b / m.c)};
}

/// Fundamental Gaussian exp(-i pi (x-xc)^2 / (lambda q) - i k tilt (x-xc)).
/// The tilt is the ray angle of the beam axis.
struct GaussianBeam {
  Complex q{0.0, 1.0};
  Complex amplitude{1.0, 0.0};
  double center = 0.0;
  double tilt = 0.0;

  void validate() const {
    if (!(q.imag() > 0.0)) throw ValidationError("gaussian beam: Im(q) must be > 0");
  }

  double spot_size(double wavelength) const { return spot_size_from_q(q, wavelength); }

  /// Power integral |amplitude|^2 w sqrt(pi/2).
  double norm_squared(double wavelength) const {
    return std::norm(amplitude) * spot_size(wavelength) * std::sqrt(std::numbers::pi / 2.0);
  }

  /// Unit-power beam with the given q.
  static GaussianBeam normalized(Complex q, double wavelength, double center = 0.0,
                                 double tilt = 0.0) {
    GaussianBeam b{q, {1.0, 0.0}, center, tilt};
    b.validate();
    b.amplitude = 1.0 / std::sqrt(b.norm_squared(wavelength));
    return b;
  }

  Complex operator()(double x, double wavelength) const {
    const double k = 2.0 * std::numbers::pi / wavelength;
    const double d = x - center;
    return amplitude *
           std::exp(Complex(0.0, -std::numbers::pi * d * d / wavelength) / q -
                    Complex(0.0, k * tilt * d));
  }

  ComplexField sample(const Grid1D& grid, double wavelength,
                      PlaneTag plane = PlaneTag::left_mirror) const {
    ComplexField f{std::vector<Complex>(grid.count), grid.dx, grid.x0, wavelength, plane};
    for (std::size_t j = 0; j < grid.count; ++j) f.samples[j] = (*this)(grid.x(j), wavelength);
    return f;
  }

  /// Image through an ABCD system, up to a constant phase.
  GaussianBeam transformed(const AbcdMatrix& m) const {
    GaussianBeam out;
    out.q = m.transform_q(q);
    out.amplitude = amplitude / std::sqrt(m.a + m.b / q);
    const RayState r = m({center, tilt});
    out.center = r.x;
    out.tilt = r.xp;
    return out;
  }
};

struct QTraceRow {
  std::size_t n = 0;
  Complex q_left;
  Complex q_right;
  double w1 = 0.0;
  double w2 = 0.0;
  /// TEM00 mode of the cavity frozen at its round-trip-n mirror positions.
  double w1_mode = 0.0;
  double w2_mode = 0.0;
};

/// Beam parameter through the moving cavity: q -> (A q + B)/(C q + D) per
/// trip on the left mirror, then through the half trip for the right mirror.
inline std::vector<QTraceRow> gaussian_q_trace(const MirrorSchedule& sched, Complex q0,
                                               std::size_t n_max, double wavelength) {
  if (!(q0.imag() > 0.0)) throw ValidationError("q trace: Im(q0) must be > 0");
  if (!(wavelength > 0.0)) throw ValidationError("q trace: wavelength must be > 0");
  std::vector<QTraceRow> rows;
  rows.reserve(n_max + 1);
  Complex q = q0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    if (n > 0) q = sched.trip_matrix(n).transform_q(q);
    const double nn = static_cast<double>(n);
    const AbcdMatrix half = sched.half_trip_at(nn);
    const Complex q_mode = eigenmode_q(sched.matrix_at(nn));
    QTraceRow row;
    row.n = n;
    row.q_left = q;
    row.q_right = half.transform_q(q);
    row.w1 = spot_size_from_q(row.q_left, wavelength);
    row.w2 = spot_size_from_q(row.q_right, wavelength);
    row.w1_mode = spot_size_from_q(q_mode, wavelength);
    row.w2_mode = spot_size_from_q(half.transform_q(q_mode), wavelength);
    rows.push_back(row);
  }
  return rows;
}

/// (lambda f / pi) sqrt((1 - cos theta)/2): the conjugate-plane spot product.
inline double conjugate_spot_product(double wavelength, double f, double theta) {
  return wavelength * f / std::numbers::pi * std::sqrt(0.5 * (1.0 - std::cos(theta)));
}

}  // namespace kanai_cavity
