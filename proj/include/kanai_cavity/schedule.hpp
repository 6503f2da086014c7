#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "kanai_cavity/core/friction.hpp"
#include "kanai_cavity/error.hpp"
#include "kanai_cavity/paraxial.hpp"

namespace kanai_cavity {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Mirror positions that keep A = cos(theta) fixed while
/// B(n) = B(0) exp(-g(n)) and C(n) = C(0) exp(g(n)).
class MirrorSchedule {
 public:
  MirrorSchedule(ResonatorGeometry geom0, FrictionProfile friction)
      : geom0_(geom0), friction_(std::move(friction)) {
    geom0_.validate();
    if (!(geom0_.l2 > geom0_.f)) {
      throw InvalidSchedule("schedule: initial l2 must exceed f (upper stability domain)");
    }
    const AbcdMatrix m0 = round_trip_matrix(geom0_);
    theta_ = strict_theta(m0);
    cos_theta_ = std::cos(theta_);
    if (!(geom0_.l1 > geom0_.f)) {
      throw InvalidSchedule("schedule: initial geometry is not in the upper stability domain");
    }
    b0_ = m0.b;
    c0_ = m0.c;
  }

  const ResonatorGeometry& initial_geometry() const { return geom0_; }
  const FrictionProfile& friction() const { return friction_; }
  double theta() const { return theta_; }
  double cos_theta() const { return cos_theta_; }
  double b0() const { return b0_; }
  double c0() const { return c0_; }

  /// Mirror distances as functions of the accumulated friction g.
  std::pair<double, double> positions_for_g(double g) const {
    const double f = geom0_.f;
    const double l2 = f + (geom0_.l2 - f) * std::exp(g);
    const double l1 = f * (2.0 * l2 - f * (1.0 - cos_theta_)) / (2.0 * l2 - 2.0 * f);
    return {l1, l2};
  }

  std::pair<double, double> positions_at(double n) const { return positions_for_g(friction_.g(n)); }

  ResonatorGeometry geometry_at(double n) const {
    const auto [l1, l2] = positions_at(n);
    return {l1, l2, geom0_.f};
  }

  /// Round trip at the mirror positions reached at round-trip number n.
  AbcdMatrix matrix_at(double n) const { return round_trip_matrix(geometry_at(n)); }
  AbcdMatrix half_trip_at(double n) const { return half_trip_matrix(geometry_at(n)); }

  /// Matrix used for the trip n-1 -> n: mirrors frozen at their position at
  /// the start of the trip.
  AbcdMatrix trip_matrix(std::size_t n) const {
    return matrix_at(n == 0 ? 0.0 : static_cast<double>(n - 1));
  }

 private:
  ResonatorGeometry geom0_;
  FrictionProfile friction_;
  double theta_ = 0.0;
  double cos_theta_ = 0.0;
  double b0_ = 0.0;
  double c0_ = 0.0;
};

inline std::pair<double, double> positions_at(const MirrorSchedule& s, double n) {
  return s.positions_at(n);
}

/// Jacobian of (B, C) with respect to (l1, l2).
struct BcJacobian {
  double db_dl1 = 0.0;
  double db_dl2 = 0.0;
  double dc_dl1 = 0.0;
  double dc_dl2 = 0.0;

  double determinant() const { return db_dl1 * dc_dl2 - db_dl2 * dc_dl1; }
};

inline BcJacobian bc_jacobian(const ResonatorGeometry& g) {
  const double f = g.f;
  const double u1 = 1.0 - g.l1 / f;
  const double u2 = 1.0 - g.l2 / f;
  const double s = g.l1 + g.l2 - g.l1 * g.l2 / f;
  return {-(2.0 / f) * s + 2.0 * u1 * u2, 2.0 * u1 * u1, 0.0, 2.0 / (f * f)};
}

struct SchedulePoint {
  double n = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
};

/// Integrates dL = J^{-1} (-B, C)^T g'(n) dn with fixed-step RK4, sampling
/// every dn. Used to cross-check the closed-form positions.
inline std::vector<SchedulePoint> integrate_schedule_ode(const ResonatorGeometry& geom0,
                                                         const FrictionProfile& friction,
                                                         double n_max, double dn) {
  namespace ode = boost::numeric::odeint;
  geom0.validate();
  if (!(n_max >= 0.0) || !(dn > 0.0)) throw ValidationError("schedule ode: need n_max >= 0, dn > 0");
  if (n_max > friction.n_max()) throw DomainError("schedule ode: friction does not cover n_max");

  using State = std::array<double, 2>;
  const double f = geom0.f;
  const double jac_floor = 1e-12 / (f * f);
  auto rhs = [&](const State& s, State& ds, double n) {
    const ResonatorGeometry g{s[0], s[1], f};
    const BcJacobian j = bc_jacobian(g);
    const double det = j.determinant();
    if (!(std::abs(det) > jac_floor)) {
      throw SingularJacobianError("schedule ode: (B, C) Jacobian is singular at n = " +
                                  std::to_string(n));
    }
    const double gdot = friction(std::min(n, friction.n_max())).gdot;
    const double rb = -cavity_b(g) * gdot;
    const double rc = cavity_c(g) * gdot;
    ds[0] = (j.dc_dl2 * rb - j.db_dl2 * rc) / det;
    ds[1] = (-j.dc_dl1 * rb + j.db_dl1 * rc) / det;
  };

  std::vector<SchedulePoint> path;
  State x{geom0.l1, geom0.l2};
  path.push_back({0.0, x[0], x[1]});
  ode::runge_kutta4<State> stepper;
  const auto steps = static_cast<std::size_t>(std::ceil(n_max / dn - 1e-12));
  double n = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double h = std::min(dn, n_max - n);
    stepper.do_step(rhs, x, n, h);
    n += h;
    path.push_back({n, x[0], x[1]});
  }
  return path;
}

/// |dL2/dt| in m/s at round trip n, with t = n T_R and T_R = (L1 + L2)/c.
inline double mirror_speed_estimate(const MirrorSchedule& s, double focal_length_m, double n) {
  if (!(focal_length_m > 0.0)) throw ValidationError("mirror speed: focal length must be > 0");
  const FrictionSample fr = s.friction()(n);
  const auto [l1, l2] = s.positions_at(n);
  const double scale = focal_length_m / s.initial_geometry().f;
  const double round_trip_time = (l1 + l2) * scale / kSpeedOfLight;
  return fr.gdot * (l2 - s.initial_geometry().f) * scale / round_trip_time;
}

}  // namespace kanai_cavity
