#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <algorithm>
#include <optional>
#include <ostream>
#include <limits>
#include <thread>
#include <utility>
#include <vector>

#include "kanai_cavity/error.hpp"

namespace kanai_cavity {

/// Paraxial ray: transverse displacement and angle.
struct RayState {
  double x = 0.0;
  double xp = 0.0;
};

/// 2x2 ray-transfer matrix [[a, b], [c, d]].
struct AbcdMatrix {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  double d = 1.0;

  static constexpr AbcdMatrix identity() { return {}; }

  constexpr double determinant() const { return a * d - b * c; }

  /// Matrix of the same elements traversed in the opposite direction.
  constexpr AbcdMatrix reversed() const { return {d, b, c, a}; }

  constexpr RayState operator()(const RayState& r) const {
    return {a * r.x + b * r.xp, c * r.x + d * r.xp};
  }

  /// Complex beam parameter transform q -> (a q + b) / (c q + d).
  std::complex<double> transform_q(std::complex<double> q) const {
    const std::complex<double> den = c * q + d;
    if (std::abs(den) <= 1e-300) {
      throw BeamParameterSingularity("beam parameter: c q + d vanishes");
    }
    return (a * q + b) / den;
  }

  friend constexpr AbcdMatrix operator*(const AbcdMatrix& l, const AbcdMatrix& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c,
            l.c * r.b + l.d * r.d};
  }

  friend std::ostream& operator<<(std::ostream& os, const AbcdMatrix& m) {
    return os << "[[" << m.a << ", " << m.b << "], [" << m.c << ", " << m.d << "]]";
  }
};

/// Free-space propagation over distance d.
inline AbcdMatrix propagation(double d) {
  if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidElement("propagation: distance must be >= 0");
  return {1.0, d, 0.0, 1.0};
}

inline AbcdMatrix thin_lens(double f) {
  if (f == 0.0 || !std::isfinite(f)) throw InvalidElement("thin lens: focal length must be nonzero");
  return {1.0, 0.0, -1.0 / f, 1.0};
}

inline AbcdMatrix flat_mirror() { return AbcdMatrix::identity(); }

/// Plane-plane cavity with an intracavity lens: left mirror, l1, lens of focal
/// length f, l2, right mirror. Lengths share one unit; f = 1 is the usual
/// normalization.
struct ResonatorGeometry {
  double l1 = 0.0;
  double l2 = 0.0;
  double f = 1.0;

  void validate() const {
    if (!(f > 0.0) || !std::isfinite(f)) throw InvalidGeometry("geometry: f must be > 0");
    if (!(l1 >= 0.0) || !(l2 >= 0.0) || !std::isfinite(l1) || !std::isfinite(l2)) {
      throw InvalidGeometry("geometry: l1, l2 must be >= 0");
    }
  }

  ResonatorGeometry normalized() const { return {l1 / f, l2 / f, 1.0}; }
};

/// Focal length in meters attached to a normalized geometry.
struct PhysicalScale {
  double focal_length_m = 1.0;

  double to_meters(double length_over_f) const { return length_over_f * focal_length_m; }
};

/// Left mirror to right mirror.
inline AbcdMatrix half_trip_matrix(const ResonatorGeometry& g) {
  g.validate();
  return propagation(g.l2) * thin_lens(g.f) * propagation(g.l1);
}

/// Round trip referenced at the left flat mirror.
inline AbcdMatrix round_trip_matrix(const ResonatorGeometry& g) {
  g.validate();
  const AbcdMatrix back = propagation(g.l1) * thin_lens(g.f) * propagation(g.l2);
  return back * half_trip_matrix(g);
}

/// Closed-form B element of the round trip.
inline double cavity_b(const ResonatorGeometry& g) {
  return 2.0 * (1.0 - g.l1 / g.f) * (g.l1 + g.l2 - g.l1 * g.l2 / g.f);
}

/// Closed-form C element of the round trip.
inline double cavity_c(const ResonatorGeometry& g) { return -(2.0 / g.f) * (1.0 - g.l2 / g.f); }

/// Closed-form shared diagonal element A = D.
inline double cavity_a(const ResonatorGeometry& g) {
  return 2.0 * (1.0 - g.l1 / g.f) * (1.0 - g.l2 / g.f) - 1.0;
}

struct StabilityInfo {
  bool stable = false;
  /// |a| = 1: on the boundary. Counted as stable but sin(theta) = 0.
  bool marginal = false;
  double a = 0.0;
  std::optional<double> theta;
};

inline constexpr double kCanonicalTolerance = 1e-9;
inline constexpr double kMarginalTolerance = 1e-12;

inline StabilityInfo stability(const AbcdMatrix& m) {
  if (std::abs(m.a - m.d) > kCanonicalTolerance) {
    throw ContractViolation("stability: matrix is not canonical (a != d)");
  }
  const double a = 0.5 * (m.a + m.d);
  StabilityInfo info;
  info.a = a;
  info.stable = std::abs(a) <= 1.0 + kMarginalTolerance;
  info.marginal = std::abs(std::abs(a) - 1.0) <= kMarginalTolerance;
  if (info.stable) info.theta = std::acos(std::clamp(a, -1.0, 1.0));
  return info;
}

/// Stable and not marginal; returns theta in (0, pi).
inline double strict_theta(const AbcdMatrix& m) {
  const StabilityInfo s = stability(m);
  if (!s.stable || s.marginal) {
    throw InvalidGeometry("cavity must be strictly inside a stability domain");
  }
  return *s.theta;
}

/// Cell-centered sampling of a rectangle in the (l1/f, l2/f) plane.
struct StabilityGrid {
  double l1_min = 0.0;
  double l1_max = 4.0;
  double l2_min = 0.0;
  double l2_max = 4.0;
  std::size_t n1 = 400;
  std::size_t n2 = 400;

  void validate() const {
    if (n1 == 0 || n2 == 0) throw ValidationError("stability grid: resolution must be positive");
    if (!(l1_max >= l1_min) || !(l2_max >= l2_min)) {
      throw ValidationError("stability grid: empty range");
    }
    if ((l1_max == l1_min && n1 != 1) || (l2_max == l2_min && n2 != 1)) {
      throw ValidationError("stability grid: degenerate range needs resolution 1");
    }
    if (l1_min < 0.0 || l2_min < 0.0) throw ValidationError("stability grid: lengths must be >= 0");
  }

  double l1_at(std::size_t i) const {
    return l1_min + (static_cast<double>(i) + 0.5) * (l1_max - l1_min) / static_cast<double>(n1);
  }
  double l2_at(std::size_t j) const {
    return l2_min + (static_cast<double>(j) + 0.5) * (l2_max - l2_min) / static_cast<double>(n2);
  }
};

/// Row-major raster, index = i * n2 + j with i along l1.
struct StabilityMap {
  StabilityGrid grid;
  std::vector<std::uint8_t> stable;
  std::vector<std::uint8_t> marginal;
  std::vector<double> theta;  // NaN where unstable

  std::size_t index(std::size_t i, std::size_t j) const { return i * grid.n2 + j; }

  /// Number of 4-connected components of strictly stable cells. Marginal
  /// cells are excluded: they lie on lines where the two domains touch.
  std::size_t connected_components() const {
    const std::size_t n1 = grid.n1;
    const std::size_t n2 = grid.n2;
    std::vector<std::uint8_t> seen(stable.size(), 0);
    auto open = [&](std::size_t k) { return stable[k] && !marginal[k] && !seen[k]; };
    std::size_t count = 0;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < stable.size(); ++start) {
      if (!open(start)) continue;
      ++count;
      seen[start] = 1;
      stack.push_back(start);
      while (!stack.empty()) {
        const std::size_t k = stack.back();
        stack.pop_back();
        const std::size_t i = k / n2;
        const std::size_t j = k % n2;
        auto visit = [&](std::size_t kk) {
          if (open(kk)) {
            seen[kk] = 1;
            stack.push_back(kk);
          }
        };
        if (i > 0) visit(k - n2);
        if (i + 1 < n1) visit(k + n2);
        if (j > 0) visit(k - 1);
        if (j + 1 < n2) visit(k + 1);
      }
    }
    return count;
  }
};

/// Stability of the lens cavity over a grid of l1/f, l2/f. Rows are split
/// across `jobs` worker threads.
inline StabilityMap stability_map(const StabilityGrid& grid, unsigned jobs = 1) {
  grid.validate();
  StabilityMap map;
  map.grid = grid;
  const std::size_t total = grid.n1 * grid.n2;
  map.stable.assign(total, 0);
  map.marginal.assign(total, 0);
  map.theta.assign(total, std::numeric_limits<double>::quiet_NaN());

  auto fill_rows = [&](std::size_t row_begin, std::size_t row_end) {
    for (std::size_t i = row_begin; i < row_end; ++i) {
      for (std::size_t j = 0; j < grid.n2; ++j) {
        const StabilityInfo s = stability(round_trip_matrix({grid.l1_at(i), grid.l2_at(j), 1.0}));
        const std::size_t k = map.index(i, j);
        map.stable[k] = s.stable ? 1 : 0;
        map.marginal[k] = s.marginal ? 1 : 0;
        if (s.theta) map.theta[k] = *s.theta;
      }
    }
  };

  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(grid.n1)));
  if (jobs == 1) {
    fill_rows(0, grid.n1);
    return map;
  }
  std::vector<std::thread> workers;
  const std::size_t chunk = (grid.n1 + jobs - 1) / jobs;
  for (std::size_t begin = 0; begin < grid.n1; begin += chunk) {
    workers.emplace_back(fill_rows, begin, std::min(grid.n1, begin + chunk));
  }
  for (auto& w : workers) w.join();
  return map;
}

}  // namespace kanai_cavity
