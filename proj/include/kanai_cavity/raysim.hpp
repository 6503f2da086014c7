#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "kanai_cavity/error.hpp"
#include "kanai_cavity/paraxial.hpp"
#include "kanai_cavity/schedule.hpp"

namespace kanai_cavity {

struct RaySample {
  std::size_t n = 0;
  RayState ray;
};

/// Rays on the left mirror, one sample per round trip starting at n = 0.
struct RayTrace {
  std::vector<RaySample> samples;

  std::vector<double> positions() const {
    std::vector<double> xs;
    xs.reserve(samples.size());
    for (const auto& s : samples) xs.push_back(s.ray.x);
    return xs;
  }
};

/// x_n = M_n x_{n-1}, with M_n frozen at the mirror positions of n-1.
inline RayTrace iterate_ray(const MirrorSchedule& sched, RayState init, std::size_t n_max) {
  if (n_max < 1) throw ValidationError("iterate_ray: n_max must be >= 1");
  RayTrace trace;
  trace.samples.reserve(n_max + 1);
  trace.samples.push_back({0, init});
  RayState r = init;
  for (std::size_t n = 1; n <= n_max; ++n) {
    r = sched.trip_matrix(n)(r);
    trace.samples.push_back({n, r});
  }
  return trace;
}

/// x_{n+1} = cos(theta) (1 + e^-gamma) x_n - e^-gamma x_{n-1}.
inline std::vector<double> iterate_ray_difference(double theta, double gamma, double x0, double x1,
                                                  std::size_t n_max) {
  std::vector<double> xs{x0};
  if (n_max >= 1) xs.push_back(x1);
  const double decay = std::exp(-gamma);
  const double lin = std::cos(theta) * (1.0 + decay);
  for (std::size_t n = 1; n < n_max; ++n) {
    xs.push_back(lin * xs[n] - decay * xs[n - 1]);
  }
  return xs;
}

/// Roots of mu^2 - cos(theta)(1 + e^-gamma) mu + e^-gamma = 0.
inline std::pair<std::complex<double>, std::complex<double>> characteristic_roots(double theta,
                                                                                  double gamma) {
  const double prod = std::exp(-gamma);
  const double sum = std::cos(theta) * (1.0 + prod);
  const std::complex<double> disc = std::sqrt(std::complex<double>(sum * sum - 4.0 * prod, 0.0));
  // Avoid cancellation: take the larger root from the formula, the other by Vieta.
  const std::complex<double> big = sum >= 0.0 ? 0.5 * (sum + disc) : 0.5 * (sum - disc);
  if (std::abs(big) == 0.0) return {big, big};
  std::complex<double> small = prod / big;
  std::complex<double> mu1 = big;
  std::complex<double> mu2 = small;
  if (mu1.imag() < mu2.imag()) std::swap(mu1, mu2);
  return {mu1, mu2};
}

/// x_n = alpha mu1^n + beta mu2^n fitted to (x0, x1).
inline double difference_closed_form(double theta, double gamma, double x0, double x1,
                                     std::size_t n) {
  const auto [mu1, mu2] = characteristic_roots(theta, gamma);
  const std::complex<double> gap = mu1 - mu2;
  if (std::abs(gap) < 1e-300) throw NumericalError("characteristic roots are degenerate");
  const std::complex<double> alpha = (x1 - mu2 * x0) / gap;
  const std::complex<double> beta = (mu1 * x0 - x1) / gap;
  const double k = static_cast<double>(n);
  return (alpha * std::pow(mu1, k) + beta * std::pow(mu2, k)).real();
}

/// Residual of the general second-order recurrence along a matrix-iterated
/// trace, one entry per interior sample n = 1 .. N-1.
inline std::vector<double> difference_residuals(const MirrorSchedule& sched, const RayTrace& trace) {
  std::vector<double> res;
  const auto& s = trace.samples;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const AbcdMatrix mk = sched.trip_matrix(k);
    const AbcdMatrix mk1 = sched.trip_matrix(k + 1);
    const double ratio = mk1.b / mk.b;
    res.push_back(s[k + 1].ray.x + ratio * s[k - 1].ray.x - (mk1.a + ratio * mk.d) * s[k].ray.x);
  }
  return res;
}

struct LissajousInit {
  double x0 = 0.0;
  double xp0 = 0.0;
  double y0 = 0.0;
  double yp0 = 0.0;
};

struct LissajousPoint {
  std::size_t n = 0;
  double x = 0.0;
  double xp = 0.0;
  double y = 0.0;
  double yp = 0.0;

  double radius() const { return std::hypot(x, y); }
};

/// Independent x and y traces through the same cavity.
inline std::vector<LissajousPoint> lissajous(const MirrorSchedule& sched, const LissajousInit& init,
                                             std::size_t n_max) {
  const RayTrace tx = iterate_ray(sched, {init.x0, init.xp0}, n_max);
  const RayTrace ty = iterate_ray(sched, {init.y0, init.yp0}, n_max);
  std::vector<LissajousPoint> pts;
  pts.reserve(tx.samples.size());
  for (std::size_t k = 0; k < tx.samples.size(); ++k) {
    pts.push_back({k, tx.samples[k].ray.x, tx.samples[k].ray.xp, ty.samples[k].ray.x,
                   ty.samples[k].ray.xp});
  }
  return pts;
}

// ---- trace analysis ----

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit least_squares_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw NumericalError("line fit: need at least two points");
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw NumericalError("line fit: abscissae coincide");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

/// Decay rate per round trip from a least-squares fit of log|x| at the local
/// maxima of |x_n|. Positive for a decaying signal.
inline double fit_envelope_decay(std::span<const double> xs) {
  std::vector<double> ns;
  std::vector<double> logs;
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    const double a = std::abs(xs[i]);
    if (a > 0.0 && a >= std::abs(xs[i - 1]) && a >= std::abs(xs[i + 1])) {
      ns.push_back(static_cast<double>(i));
      logs.push_back(std::log(a));
    }
  }
  if (ns.size() < 2) throw NumericalError("envelope fit: fewer than two local maxima");
  return -least_squares_line(ns, logs).slope;
}

/// Oscillation period in round trips from linearly interpolated upward zero
/// crossings.
inline double fit_period(std::span<const double> xs) {
  std::vector<double> crossings;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (xs[i] < 0.0 && xs[i + 1] >= 0.0) {
      crossings.push_back(static_cast<double>(i) + xs[i] / (xs[i] - xs[i + 1]));
    }
  }
  if (crossings.size() < 2) throw NumericalError("period fit: fewer than two zero crossings");
  return (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

struct EnvelopeSample {
  std::size_t window_start = 0;
  std::size_t n_at_max = 0;
  double r_max = 0.0;
};

/// Maximum spot radius over consecutive windows of whole oscillation periods.
/// A window must span enough periods for the sampled phases to cover the
/// ellipse; twenty periods resolve the maxima well below the per-window decay
/// for gamma down to ~1e-3.
inline std::vector<EnvelopeSample> radius_envelope(std::span<const LissajousPoint> pts,
                                                   double theta, double periods_per_window = 20.0) {
  if (!(theta > 0.0) || !(periods_per_window > 0.0)) {
    throw ValidationError("radius envelope: theta and window must be positive");
  }
  const auto window = static_cast<std::size_t>(
      std::ceil(periods_per_window * 2.0 * std::numbers::pi / theta));
  std::vector<EnvelopeSample> env;
  for (std::size_t start = 0; start + window <= pts.size(); start += window) {
    EnvelopeSample e{start, start, -1.0};
    for (std::size_t k = start; k < start + window; ++k) {
      const double r = pts[k].radius();
      if (r > e.r_max) {
        e.r_max = r;
        e.n_at_max = pts[k].n;
      }
    }
    env.push_back(e);
  }
  return env;
}

/// Log-slope of the per-window maximum radius (negative for contraction).
inline double envelope_log_slope(std::span<const EnvelopeSample> env) {
  std::vector<double> ns;
  std::vector<double> logs;
  for (const auto& e : env) {
    if (e.r_max <= 0.0) throw NumericalError("envelope slope: zero radius");
    ns.push_back(static_cast<double>(e.n_at_max));
    logs.push_back(std::log(e.r_max));
  }
  return least_squares_line(ns, logs).slope;
}

}  // namespace kanai_cavity
