#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "kanai_cavity/error.hpp"

namespace kanai_cavity {

using Complex = std::complex<double>;

enum class PlaneTag { left_mirror, right_mirror };

inline const char* to_string(PlaneTag p) {
  return p == PlaneTag::left_mirror ? "left_mirror" : "right_mirror";
}

inline PlaneTag plane_from_string(const std::string& s) {
  if (s == "left_mirror") return PlaneTag::left_mirror;
  if (s == "right_mirror") return PlaneTag::right_mirror;
  throw ValidationError("unknown plane tag: " + s);
}

/// Uniform transverse grid x_j = x0 + j dx, j = 0 .. count-1.
struct Grid1D {
  double x0 = 0.0;
  double dx = 1.0;
  std::size_t count = 0;

  /// Grid with x = 0 at index count/2.
  static Grid1D centered(std::size_t count, double dx) {
    return {-static_cast<double>(count / 2) * dx, dx, count};
  }

  double x(std::size_t j) const { return x0 + static_cast<double>(j) * dx; }
  double width() const { return static_cast<double>(count) * dx; }
};

inline bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 2;
  while (p < n) p <<= 1;
  return p;
}

/// Complex transverse amplitude on a uniform grid.
struct ComplexField {
  std::vector<Complex> samples;
  double dx = 1.0;
  double x0 = 0.0;
  double wavelength = 1.0;
  PlaneTag plane = PlaneTag::left_mirror;

  std::size_t size() const { return samples.size(); }
  Grid1D grid() const { return {x0, dx, samples.size()}; }
  double x(std::size_t j) const { return x0 + static_cast<double>(j) * dx; }
  double wavenumber() const { return 2.0 * std::numbers::pi / wavelength; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& v : samples) s += std::norm(v);
    return s * dx;
  }

  void validate() const {
    if (!is_power_of_two(samples.size())) {
      throw ValidationError("field: sample count must be a power of two");
    }
    if (!(dx > 0.0) || !(wavelength > 0.0)) {
      throw ValidationError("field: dx and wavelength must be positive");
    }
    const double n2 = norm_squared();
    if (!(n2 > 0.0) || !std::isfinite(n2)) {
      throw ValidationError("field: norm must be finite and positive");
    }
  }
};

/// Intensity-weighted mean position and standard deviation.
struct FieldMoments {
  double mean = 0.0;
  double stddev = 0.0;
  double norm = 0.0;
};

inline FieldMoments field_moments(const ComplexField& f) {
  double s0 = 0.0;
  double s1 = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double w = std::norm(f.samples[j]);
    s0 += w;
    s1 += w * f.x(j);
  }
  if (!(s0 > 0.0)) throw ResolutionError("field moments: zero intensity");
  const double mean = s1 / s0;
  double s2 = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double d = f.x(j) - mean;
    s2 += std::norm(f.samples[j]) * d * d;
  }
  return {mean, std::sqrt(s2 / s0), s0 * f.dx};
}

/// Spot size 2 sigma of the intensity (the 1/e^2 radius for a Gaussian).
inline double spot_size(const ComplexField& f) {
  std::size_t lit = 0;
  double peak = 0.0;
  for (const auto& v : f.samples) peak = std::max(peak, std::abs(v));
  for (const auto& v : f.samples) {
    if (std::abs(v) > 1e-12 * peak) ++lit;
  }
  if (f.size() < 2 || lit < 2) throw ResolutionError("spot size: field occupies a single pixel");
  return 2.0 * field_moments(f).stddev;
}

inline Complex inner_product(const ComplexField& a, const ComplexField& b) {
  if (a.size() != b.size()) throw ValidationError("inner product: grid sizes differ");
  Complex s{0.0, 0.0};
  for (std::size_t j = 0; j < a.size(); ++j) s += std::conj(a.samples[j]) * b.samples[j];
  return s * a.dx;
}

/// || a/|a| - e^{i phi} b/|b| || minimised over the global phase phi. Summed
/// directly: sqrt(2 - 2|overlap|) bottoms out near sqrt(eps).
inline double phase_aligned_distance(const ComplexField& a, const ComplexField& b) {
  const double na = std::sqrt(a.norm_squared());
  const double nb = std::sqrt(b.norm_squared());
  const Complex ov = inner_product(a, b);
  const Complex phase = std::abs(ov) > 0.0 ? std::conj(ov) / std::abs(ov) : Complex(1.0, 0.0);
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    s += std::norm(a.samples[j] / na - phase * b.samples[j] / nb);
  }
  return std::sqrt(s * a.dx);
}

/// Four-point Lagrange interpolation of `f` onto `target`; zero outside.
inline ComplexField resample(const ComplexField& f, const Grid1D& target) {
  ComplexField out{std::vector<Complex>(target.count), target.dx, target.x0, f.wavelength, f.plane};
  const auto n = static_cast<std::ptrdiff_t>(f.size());
  for (std::size_t k = 0; k < target.count; ++k) {
    const double u = (target.x(k) - f.x0) / f.dx;
    const auto i = static_cast<std::ptrdiff_t>(std::floor(u));
    if (i < 1 || i + 2 >= n) continue;
    const double t = u - static_cast<double>(i);
    const double w0 = -t * (t - 1) * (t - 2) / 6.0;
    const double w1 = (t + 1) * (t - 1) * (t - 2) / 2.0;
    const double w2 = -(t + 1) * t * (t - 2) / 2.0;
    const double w3 = (t + 1) * t * (t - 1) / 6.0;
    out.samples[k] = w0 * f.samples[i - 1] + w1 * f.samples[i] + w2 * f.samples[i + 1] +
                     w3 * f.samples[i + 2];
  }
  return out;
}

}  // namespace kanai_cavity
