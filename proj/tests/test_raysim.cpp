#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kanai_cavity/core/oscillator.hpp"
#include "kanai_cavity/raysim.hpp"
#include "oracles.hpp"

using namespace kanai_cavity;

namespace {

MirrorSchedule reference(double gamma) {
  return MirrorSchedule({1.7, 1.5, 1.0}, FrictionProfile::constant(gamma));
}

}  // namespace

TEST(RayIteration, UndampedInvariant) {
  const auto s = reference(0.0);
  const auto trace = iterate_ray(s, {1.0, 0.2}, 5000);
  ASSERT_EQ(trace.samples.size(), 5001u);
  const AbcdMatrix m = s.matrix_at(0.0);
  auto q = [&](const RayState& r) { return -m.c * r.x * r.x + m.b * r.xp * r.xp; };
  const double q0 = q(trace.samples.front().ray);
  for (const auto& smp : trace.samples) ASSERT_NEAR(q(smp.ray), q0, 1e-10 * std::abs(q0));
  EXPECT_THROW(iterate_ray(s, {1.0, 0.0}, 0), ValidationError);
}

TEST(RayIteration, DampedFits) {
  const double gamma = 1e-3;
  const auto s = reference(gamma);
  const auto xs = iterate_ray(s, {1.0, 0.0}, 5000).positions();
  EXPECT_NEAR(fit_envelope_decay(xs), gamma / 2, 0.01 * gamma / 2);
  EXPECT_NEAR(fit_period(xs), 2 * std::numbers::pi / s.theta(), 0.01 * 2 * std::numbers::pi / s.theta());
  EXPECT_NEAR(fit_period(xs), 3.35, 0.01);
}

TEST(RayIteration, UndampedFitsNoDecay) {
  const auto xs = iterate_ray(reference(0.0), {1.0, 0.0}, 5000).positions();
  EXPECT_LT(std::abs(fit_envelope_decay(xs)), 1e-6);
}

TEST(RayDifference, ChebyshevWhenUndamped) {
  const double theta = 1.2;
  const auto xs = iterate_ray_difference(theta, 0.0, 1.0, std::cos(theta), 200);
  for (std::size_t n = 0; n < xs.size(); ++n) ASSERT_NEAR(xs[n], std::cos(theta * n), 1e-10);
}

TEST(RayDifference, AgreesWithMatrixIteration) {
  const double gamma = 1e-3;
  const auto s = reference(gamma);
  const auto trace = iterate_ray(s, {1.0, 0.0}, 5000);
  const auto xs = trace.positions();
  const auto diff = iterate_ray_difference(s.theta(), gamma, xs[0], xs[1], 5000);
  ASSERT_EQ(diff.size(), xs.size());
  double worst = 0.0;
  for (std::size_t n = 0; n < xs.size(); ++n) worst = std::max(worst, std::abs(xs[n] - diff[n]));
  EXPECT_LT(worst, 1e-9);
}

TEST(RayDifference, GeneralRecurrenceResidual) {
  // Non-exponential schedule: g(n) = 0.01 n^2/(50 + n).
  std::vector<double> ns, gs;
  for (int i = 0; i <= 400; ++i) {
    ns.push_back(i);
    gs.push_back(0.01 * i * i / (50.0 + i));
  }
  const MirrorSchedule s({1.7, 1.5, 1.0}, FrictionProfile::tabulated(ns, gs));
  const auto trace = iterate_ray(s, {0.3, -0.4}, 400);
  const auto res = difference_residuals(s, trace);
  ASSERT_EQ(res.size(), 399u);
  for (double r : res) ASSERT_LT(std::abs(r), 1e-12);
}

TEST(CharacteristicRoots, UndampedOnUnitCircle) {
  const double theta = 1.875;
  const auto [mu1, mu2] = characteristic_roots(theta, 0.0);
  EXPECT_NEAR(std::abs(mu1 - std::polar(1.0, theta)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(mu2 - std::polar(1.0, -theta)), 0.0, 1e-14);
}

TEST(CharacteristicRoots, ModulusIsHalfGamma) {
  oracle::Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const double theta = rng.uniform(0.05, std::numbers::pi - 0.05);
    const double gamma = std::pow(10.0, rng.uniform(-6, -1));
    const auto [mu1, mu2] = characteristic_roots(theta, gamma);
    ASSERT_NEAR(std::abs(mu1), std::exp(-gamma / 2), 1e-14);
    ASSERT_NEAR(std::abs(mu2), std::exp(-gamma / 2), 1e-14);
    // Vieta
    const auto prod = mu1 * mu2;
    const auto sum = mu1 + mu2;
    ASSERT_NEAR(prod.real(), std::exp(-gamma), 1e-14);
    ASSERT_NEAR(prod.imag(), 0.0, 1e-14);
    ASSERT_NEAR(sum.real(), std::cos(theta) * (1 + std::exp(-gamma)), 1e-14);
    ASSERT_NEAR(std::arg(mu1), theta, gamma);
  }
}

TEST(CharacteristicRoots, ClosedFormMatchesRecurrence) {
  oracle::Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const double theta = rng.uniform(0.1, 3.0);
    const double gamma = std::pow(10.0, rng.uniform(-5, -2));
    const double x0 = rng.uniform(-1, 1), x1 = rng.uniform(-1, 1);
    const auto xs = iterate_ray_difference(theta, gamma, x0, x1, 2000);
    for (std::size_t n = 0; n < xs.size(); n += 7) {
      ASSERT_NEAR(difference_closed_form(theta, gamma, x0, x1, n), xs[n], 1e-9);
    }
  }
}

// The ray is a sampled solution of the damped oscillator: x0 u2 + v0 u1 with
// v0 = (B theta / sin theta) x'0 the initial rate per round trip.
TEST(RayIteration, SamplesContinuousOscillator) {
  const double gamma = 1e-3;
  const auto s = reference(gamma);
  const double theta = s.theta();
  const auto sol = fundamental_solutions({theta, FrictionProfile::constant(gamma)});
  const RayState r0{1.0, 0.4};
  const double v0 = s.b0() * theta / std::sin(theta) * r0.xp;
  const auto trace = iterate_ray(s, r0, 5000);
  const double amp = std::hypot(r0.x, v0 / theta);
  for (const auto& smp : trace.samples) {
    const double n = static_cast<double>(smp.n);
    ASSERT_NEAR(smp.ray.x, r0.x * sol.u2(n) + v0 * sol.u1(n), 0.01 * amp) << n;
  }
}

TEST(Lissajous, OriginStaysPut) {
  const auto pts = lissajous(reference(1e-3), {}, 100);
  for (const auto& p : pts) EXPECT_EQ(p.radius(), 0.0);
}

TEST(Lissajous, ContractingEnvelope) {
  const double gamma = 1e-3;
  const auto s = reference(gamma);
  const auto pts = lissajous(s, {1.0, 0.0, 0.7, 0.5}, 5000);
  const auto env = radius_envelope(pts, s.theta());
  ASSERT_GE(env.size(), 10u);
  for (std::size_t k = 1; k < env.size(); ++k) ASSERT_LT(env[k].r_max, env[k - 1].r_max);
  EXPECT_NEAR(envelope_log_slope(env), -gamma / 2, 0.02 * gamma / 2);
}

TEST(Lissajous, StationaryEnvelopeWithoutFriction) {
  const auto s = reference(0.0);
  const auto pts = lissajous(s, {1.0, 0.0, 0.7, 0.5}, 5000);
  const auto env = radius_envelope(pts, s.theta());
  EXPECT_LT(std::abs(envelope_log_slope(env)), 1e-5);
}

TEST(Fits, Errors) {
  const std::vector<double> flat(10, 1.0);
  EXPECT_THROW(fit_period(flat), NumericalError);
  const std::vector<double> one{1.0};
  EXPECT_THROW(least_squares_line(one, one), NumericalError);
  EXPECT_THROW(radius_envelope({}, 0.0), ValidationError);
  const auto line = least_squares_line(std::vector<double>{0, 1, 2}, std::vector<double>{1, 3, 5});
  EXPECT_NEAR(line.slope, 2.0, 1e-15);
  EXPECT_NEAR(line.intercept, 1.0, 1e-15);
}
