#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "kanai_cavity/error.hpp"
#include "kanai_cavity/paraxial.hpp"
#include "kanai_cavity/wavesim/field.hpp"

namespace kanai_cavity {

struct FresnelOptions {
  /// |B| at or below this (in the field's length unit) is a focal-plane error.
  double eps_b = 1e-9;
  bool check_sampling = true;
  /// Samples weaker than this fraction of the peak amplitude are ignored by
  /// the chirp Nyquist check.
  double support_threshold = 1e-10;
  /// Largest energy fraction tolerated in the outer 1/16 of the output window
  /// on either side before the output is declared wrapped.
  double edge_tolerance = 1e-9;
  PlaneTag output_plane = PlaneTag::left_mirror;
};

/// Generalized Fresnel integral
///   psi'(x) = sqrt(i/(lambda B)) Int exp[-i pi/(lambda B)(A xi^2 + D x^2 - 2 x xi)] psi(xi) dxi
/// evaluated as chirp, DFT, chirp. The output grid is centered with spacing
/// lambda |B| / (N dx), so it rescales with B.
///
/// Holds the transform plan; reuse one instance per run, not across threads.
class FresnelPropagator {
 public:
  explicit FresnelPropagator(FresnelOptions opts = {}) : opts_(opts) {
    fft_.SetFlag(Eigen::FFT<double>::Unscaled);
  }

  const FresnelOptions& options() const { return opts_; }

  ComplexField apply(const ComplexField& in, const AbcdMatrix& m) {
    return apply(in, m, opts_.output_plane);
  }

  ComplexField apply(const ComplexField& in, const AbcdMatrix& m, PlaneTag out_plane) {
    in.validate();
    if (!(std::abs(m.b) > opts_.eps_b)) {
      throw NearFocalPlaneError("fresnel: |B| = " + std::to_string(std::abs(m.b)) +
                                " is at the focal-plane limit");
    }
    const std::size_t n = in.size();
    const double lam = in.wavelength;
    const double lb = lam * m.b;
    const double lbabs = std::abs(lb);
    const double s = m.b > 0.0 ? 1.0 : -1.0;
    const double pi = std::numbers::pi;

    const double dx_out = lbabs / (static_cast<double>(n) * in.dx);
    const double x0_out = -static_cast<double>(n / 2) * dx_out;

    if (opts_.check_sampling) check_input_sampling(in, m);

    in_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double xi = in.x(j);
      const double phase = -pi * m.a * xi * xi / lb +
                           2.0 * pi * s * x0_out * static_cast<double>(j) * in.dx / lbabs;
      in_[j] = in.samples[j] * std::polar(1.0, phase);
    }
    if (s < 0.0) {
      fft_.fwd(out_, in_);
    } else {
      fft_.inv(out_, in_);
    }

    ComplexField out{std::vector<Complex>(n), dx_out, x0_out, lam, out_plane};
    const Complex amp = std::sqrt(Complex(0.0, 1.0 / lb)) * in.dx;
    for (std::size_t k = 0; k < n; ++k) {
      const double x = out.x(k);
      const double phase = 2.0 * pi * s * (static_cast<double>(k) * dx_out * in.x0 + x0_out * in.x0) / lbabs -
                           pi * m.d * x * x / lb;
      out.samples[k] = amp * out_[k] * std::polar(1.0, phase);
    }
    if (opts_.check_sampling) check_output_edges(out);
    return out;
  }

 private:
  // Local spatial frequency of the pre-chirped integrand must stay inside the
  // DFT band wherever the field is not negligible.
  void check_input_sampling(const ComplexField& in, const AbcdMatrix& m) const {
    const double lb = in.wavelength * m.b;
    double peak = 0.0;
    for (const auto& v : in.samples) peak = std::max(peak, std::abs(v));
    const double floor = opts_.support_threshold * peak;
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < in.size(); ++j) {
      if (std::abs(in.samples[j]) <= floor || std::abs(in.samples[j + 1]) <= floor) continue;
      const double field_freq =
          std::arg(in.samples[j + 1] * std::conj(in.samples[j])) / (2.0 * std::numbers::pi * in.dx);
      const double xi = in.x(j) + 0.5 * in.dx;
      const double total = field_freq - m.a * xi / lb;
      worst = std::max(worst, std::abs(total) * 2.0 * in.dx);
    }
    if (worst >= 1.0) {
      const auto want = static_cast<std::size_t>(std::ceil(static_cast<double>(in.size()) * worst * 1.25));
      throw SamplingError("fresnel: chirp aliasing (local frequency " + std::to_string(worst) +
                              " x Nyquist); increase the sample count",
                          next_power_of_two(want));
    }
  }

  void check_output_edges(const ComplexField& out) const {
    const std::size_t band = std::max<std::size_t>(1, out.size() / 16);
    double edge = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double w = std::norm(out.samples[k]);
      total += w;
      if (k < band || k >= out.size() - band) edge += w;
    }
    if (total > 0.0 && edge / total > opts_.edge_tolerance) {
      throw SamplingError("fresnel: output wraps around the window (edge energy fraction " +
                              std::to_string(edge / total) + ")",
                          2 * out.size());
    }
  }

  FresnelOptions opts_;
  Eigen::FFT<double> fft_;
  std::vector<Complex> in_;
  std::vector<Complex> out_;
};

inline ComplexField fresnel_round_trip(const ComplexField& field, const AbcdMatrix& m,
                                       const FresnelOptions& opts = {}) {
  FresnelPropagator prop(opts);
  return prop.apply(field, m, field.plane);
}

}  // namespace kanai_cavity
