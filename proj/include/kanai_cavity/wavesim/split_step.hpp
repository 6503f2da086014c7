#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "kanai_cavity/error.hpp"
#include "kanai_cavity/wavesim/field.hpp"

namespace kanai_cavity {

/// Coefficients of i dpsi/dn = kinetic d2psi/dx2 + potential x^2 psi.
struct CavitySchrodingerCoefficients {
  double kinetic = 0.0;
  double potential = 0.0;
};

inline constexpr double kMinSinTheta = 1e-9;

inline CavitySchrodingerCoefficients cavity_schrodinger_coefficients(double theta, double b,
                                                                     double c, double k) {
  const double s = std::sin(theta);
  if (!(std::abs(s) > kMinSinTheta)) {
    throw NearInstabilityError("sin(theta) is too small: cavity at a stability boundary");
  }
  return {b * theta / (2.0 * k * s), k * theta * c / (2.0 * s)};
}

enum class SplitScheme {
  /// Half potential kick, full kinetic drift, half kick per substep.
  strang,
  /// Same kick-drift-kick structure with the kick and drift lengths chosen so
  /// that each substep is exact for the frozen quadratic Hamiltonian.
  exact_quadratic,
};

/// Fixed-grid symmetric splitting of the cavity Schrodinger equation over one
/// round trip (dn = 1).
class SplitStepPropagator {
 public:
  explicit SplitStepPropagator(SplitScheme scheme = SplitScheme::exact_quadratic)
      : scheme_(scheme) {
    fft_.SetFlag(Eigen::FFT<double>::Unscaled);
  }

  ComplexField apply(const ComplexField& in, double theta, double b, double c,
                     std::size_t substeps) {
    in.validate();
    if (substeps < 1) throw ValidationError("split step: substeps must be >= 1");
    const double k = in.wavenumber();
    const CavitySchrodingerCoefficients co = cavity_schrodinger_coefficients(theta, b, c, k);
    const double h = 1.0 / static_cast<double>(substeps);

    double kick = 0.5 * h;
    double drift = h;
    if (scheme_ == SplitScheme::exact_quadratic) {
      const auto [k_len, d_len] = exact_lengths(co, h);
      kick = k_len;
      drift = d_len;
    }

    const std::size_t n = in.size();
    const double pi = std::numbers::pi;
    std::vector<Complex> kick_phase(n);
    std::vector<Complex> drift_phase(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = in.x(j);
      kick_phase[j] = std::polar(1.0, -kick * co.potential * x * x);
      // d2/dx2 -> -(2 pi nu)^2 in FFT order.
      const double idx = j < n / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
      const double kx = 2.0 * pi * idx / (static_cast<double>(n) * in.dx);
      drift_phase[j] = std::polar(1.0 / static_cast<double>(n), drift * co.kinetic * kx * kx);
    }

    ComplexField out = in;
    std::vector<Complex>& psi = out.samples;
    for (std::size_t step = 0; step < substeps; ++step) {
      for (std::size_t j = 0; j < n; ++j) psi[j] *= kick_phase[j];
      fft_.fwd(spec_, psi);
      for (std::size_t j = 0; j < n; ++j) spec_[j] *= drift_phase[j];
      fft_.inv(psi, spec_);
      for (std::size_t j = 0; j < n; ++j) psi[j] *= kick_phase[j];
    }
    return out;
  }

 private:
  // Flow of H = -kinetic p^2 + potential x^2 has generator G with
  // G^2 = 4 kinetic potential. Kick (tau_k) . drift (tau_d) . kick (tau_k)
  // reproduces exp(G h) exactly for
  //   tau_d = sin(w h)/w, tau_k = tan(w h/2)/w       (elliptic, w^2 = -4 kin pot)
  //   tau_d = sinh(w h)/w, tau_k = tanh(w h/2)/w     (hyperbolic)
  static std::pair<double, double> exact_lengths(const CavitySchrodingerCoefficients& co, double h) {
    const double g2 = 4.0 * co.kinetic * co.potential;
    const double w = std::sqrt(std::abs(g2));
    const double phi = w * h;
    if (phi < 1e-6) {
      // series to O(phi^2)
      const double sgn = g2 < 0.0 ? 1.0 : -1.0;
      return {0.5 * h * (1.0 + sgn * phi * phi / 12.0), h * (1.0 - sgn * phi * phi / 6.0)};
    }
    if (g2 < 0.0) return {std::tan(0.5 * phi) / w, std::sin(phi) / w};
    return {std::tanh(0.5 * phi) / w, std::sinh(phi) / w};
  }

  SplitScheme scheme_;
  Eigen::FFT<double> fft_;
  std::vector<Complex> spec_;
};

inline ComplexField split_step_round_trip(const ComplexField& field, double theta, double b,
                                          double c, double k, std::size_t substeps,
                                          SplitScheme scheme = SplitScheme::exact_quadratic) {
  const double k_field = field.wavenumber();
  if (std::abs(k - k_field) > 1e-12 * k_field) {
    throw ValidationError("split step: wavenumber does not match the field wavelength");
  }
  SplitStepPropagator prop(scheme);
  return prop.apply(field, theta, b, c, substeps);
}

}  // namespace kanai_cavity
