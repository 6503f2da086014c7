#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kanai_cavity/core/oscillator.hpp"
#include "kanai_cavity/raysim.hpp"
#include "kanai_cavity/wavesim/collapse.hpp"
#include "kanai_cavity/wavesim/snapshot.hpp"
#include "oracles.hpp"

using namespace kanai_cavity;

namespace {

constexpr double kLambda = 1e-4;
constexpr double kPi = std::numbers::pi;

MirrorSchedule reference(double gamma) {
  return MirrorSchedule({1.7, 1.5, 1.0}, FrictionProfile::constant(gamma));
}

double relative_l2(const ComplexField& a, const ComplexField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num += std::norm(a.samples[j] - b.samples[j]);
    den += std::norm(b.samples[j]);
  }
  return std::sqrt(num / den);
}

ComplexField gaussian_field(double w, std::size_t n, double window) {
  const Grid1D grid = Grid1D::centered(n, window / static_cast<double>(n));
  ComplexField f{std::vector<Complex>(n), grid.dx, grid.x0, kLambda, PlaneTag::left_mirror};
  for (std::size_t j = 0; j < n; ++j) f.samples[j] = std::exp(-grid.x(j) * grid.x(j) / (w * w));
  return f;
}

double overlap_deficit(const ComplexField& a, const ComplexField& b) {
  const double d = phase_aligned_distance(a, b);
  return d * d / 2.0;
}

}  // namespace

// ---- field utilities ----

TEST(Field, SpotSizeOfSampledGaussian) {
  const double w = 5e-3;
  const auto f = gaussian_field(w, 4096, 16 * w);
  EXPECT_NEAR(spot_size(f), w, 1e-6 * w);
  // A pure phase does not change the spot size.
  auto chirped = f;
  for (std::size_t j = 0; j < f.size(); ++j) {
    chirped.samples[j] *= std::polar(1.0, 3e5 * f.x(j) * f.x(j) + 40.0 * f.x(j));
  }
  EXPECT_NEAR(spot_size(chirped), spot_size(f), 1e-15);
  EXPECT_NEAR(field_moments(f).norm, w * std::sqrt(kPi / 2), 1e-12 * w);
}

TEST(Field, SinglePixelAndValidation) {
  ComplexField f{std::vector<Complex>(8, 0.0), 1e-3, 0.0, kLambda, PlaneTag::left_mirror};
  f.samples[3] = 1.0;
  EXPECT_THROW(spot_size(f), ResolutionError);
  ComplexField odd{std::vector<Complex>(6, 1.0), 1e-3, 0.0, kLambda, PlaneTag::left_mirror};
  EXPECT_THROW(odd.validate(), ValidationError);
  ComplexField zero{std::vector<Complex>(8, 0.0), 1e-3, 0.0, kLambda, PlaneTag::left_mirror};
  EXPECT_THROW(zero.validate(), ValidationError);
  EXPECT_EQ(plane_from_string("right_mirror"), PlaneTag::right_mirror);
  EXPECT_THROW(plane_from_string("lens"), ValidationError);
  EXPECT_EQ(next_power_of_two(1000), 1024u);
  EXPECT_TRUE(is_power_of_two(4096));
  EXPECT_FALSE(is_power_of_two(1));
}

TEST(Field, ResampleReproducesSmoothField) {
  const double w = 5e-3;
  const auto f = gaussian_field(w, 1024, 16 * w);
  const Grid1D target{-3 * w + 1.234e-5, w / 97.0, 512};
  const auto r = resample(f, target);
  for (std::size_t k = 0; k < target.count; ++k) {
    const double x = target.x(k);
    ASSERT_NEAR(std::abs(r.samples[k] - std::exp(-x * x / (w * w))), 0.0, 1e-6);
  }
}

// ---- Gaussian beams ----

TEST(Gaussian, EigenmodeSpotSize) {
  const AbcdMatrix m = round_trip_matrix({1.7, 1.5, 1.0});
  const Complex q = eigenmode_q(m);
  EXPECT_NEAR(std::abs(m.transform_q(q) - q), 0.0, 1e-14);
  const double w = spot_size_from_q(q, kLambda);
  EXPECT_NEAR(w, std::sqrt(kLambda / kPi) * std::pow(0.91, 0.25), 1e-15);
  EXPECT_THROW(eigenmode_q({1.2, 1.0, 0.44, 1.2}), NearInstabilityError);
  EXPECT_THROW(spot_size_from_q({1.0, -1.0}, kLambda), BeamParameterSingularity);
}

TEST(Gaussian, NormalizedBeamHasUnitPower) {
  const auto beam = GaussianBeam::normalized({0.3, 0.7}, kLambda, 1e-3, 2e-3);
  const double w = beam.spot_size(kLambda);
  const auto f = beam.sample(Grid1D::centered(4096, 32 * w / 4096), kLambda);
  EXPECT_NEAR(f.norm_squared(), 1.0, 1e-10);
  EXPECT_NEAR(field_moments(f).mean, 1e-3, 1e-10);
  EXPECT_THROW(GaussianBeam::normalized({0.0, -1.0}, kLambda), ValidationError);
}

// Conjugate-plane product from an independent q propagation through the
// half trip, written out by hand.
TEST(Gaussian, ConjugateSpotProduct) {
  oracle::Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto [l1, l2] = oracle::upper_domain_geometry(rng);
    const ResonatorGeometry g{l1, l2, 1.0};
    const oracle::Mat m = oracle::cavity_round_trip(l1, l2, 1.0);
    const oracle::cd q(0.0, std::sqrt(-m[1] / m[2]));
    oracle::Mat h = oracle::free_space(l1);
    h = oracle::mul(oracle::lens(1.0), h);
    h = oracle::mul(oracle::free_space(l2), h);
    const oracle::cd q2 = (h[0] * q + h[1]) / (h[2] * q + h[3]);
    auto w = [](oracle::cd qq) { return std::sqrt(-kLambda / (kPi * (1.0 / qq).imag())); };
    const double theta = std::acos(0.5 * (m[0] + m[3]));
    ASSERT_NEAR(w(q) * w(q2) / conjugate_spot_product(kLambda, 1.0, theta), 1.0, 1e-12);
    ASSERT_NEAR(h[1], (1 - std::cos(theta)) / 2, 1e-12);
    (void)g;
  }
}

// ---- Fresnel engine ----

TEST(Fresnel, FreePropagationMatchesAnalyticDiffraction) {
  const double w0 = 1e-2;
  for (double z : {0.05, 0.5, 2.0}) {
    const auto in = gaussian_field(w0, 4096, 16 * w0);
    const auto out = fresnel_round_trip(in, propagation(z));
    ComplexField ref = out;
    for (std::size_t k = 0; k < out.size(); ++k) {
      ref.samples[k] = oracle::diffracted_gaussian(out.x(k), w0, z, kLambda);
    }
    EXPECT_LT(relative_l2(out, ref), 1e-8) << "z = " << z;
    EXPECT_NEAR(out.dx, kLambda * z / (4096 * in.dx), 1e-18);
  }
}

TEST(Fresnel, DisplacedTiltedBeamMatchesAbcdImage) {
  const AbcdMatrix mats[] = {round_trip_matrix({1.7, 1.5, 1.0}), half_trip_matrix({1.7, 1.5, 1.0}),
                             round_trip_matrix({2.3, 1.2, 1.0}), {0.8, -0.4, 0.9, 0.8}};
  for (const AbcdMatrix& m : mats) {
    const Complex q = eigenmode_q(round_trip_matrix({1.7, 1.5, 1.0}));
    const auto beam = GaussianBeam::normalized(q, kLambda, 1.5e-3, 1.5e-3);
    const double w = beam.spot_size(kLambda);
    const auto in = beam.sample(Grid1D::centered(4096, 24 * w / 4096), kLambda);
    const auto out = fresnel_round_trip(in, m);
    const auto ref = beam.transformed(m).sample(out.grid(), kLambda);
    EXPECT_LT(phase_aligned_distance(out, ref), 1e-8);
    // Amplitude factor 1/sqrt(A + B/q) carries the power exactly.
    EXPECT_NEAR(out.norm_squared(), 1.0, 1e-10);
  }
}

TEST(Fresnel, EigenmodeIsStationary) {
  const auto s = reference(0.0);
  const AbcdMatrix m = s.matrix_at(0.0);
  const auto beam = initial_eigenmode(s, kLambda);
  CollapseOptions co;
  const auto in = beam.sample(collapse_grid(beam, kLambda, co), kLambda);
  FresnelPropagator prop;
  ComplexField psi = in;
  double prev_norm = in.norm_squared();
  for (int trip = 1; trip <= 20; ++trip) {
    psi = prop.apply(psi, m);
    const double nrm = psi.norm_squared();
    EXPECT_LT(std::abs(nrm - prev_norm), 1e-6);
    prev_norm = nrm;
    const auto mode = beam.sample(psi.grid(), kLambda);
    EXPECT_LT(overlap_deficit(psi, mode), 1e-6) << trip;
    EXPECT_NEAR(spot_size(psi), beam.spot_size(kLambda), 1e-6 * beam.spot_size(kLambda));
  }
  // Two trips return to the input grid.
  const auto two = prop.apply(prop.apply(in, m), m);
  EXPECT_NEAR(two.dx, in.dx, 1e-15 * in.dx);
  EXPECT_NEAR(two.x0, in.x0, 1e-12 * std::abs(in.x0));
  EXPECT_LT(overlap_deficit(two, in), 1e-6);
}

TEST(Fresnel, Errors) {
  const auto in = gaussian_field(1e-2, 64, 0.16);
  EXPECT_THROW(fresnel_round_trip(in, {1.0, 1e-12, 0.0, 1.0}), NearFocalPlaneError);
  try {
    fresnel_round_trip(in, {1.0, 0.1, 0.0, 1.0});
    FAIL() << "expected a sampling error";
  } catch (const SamplingError& e) {
    EXPECT_GT(e.suggested_n(), 64u);
    EXPECT_TRUE(is_power_of_two(e.suggested_n()));
  }
  // Edge energy: a window barely wider than the beam wraps.
  const auto tight = gaussian_field(1e-2, 4096, 0.16);
  EXPECT_THROW(fresnel_round_trip(tight, {1.0, 2e-3, 0.0, 1.0}), SamplingError);
}

TEST(FresnelProperty, UnitaryOnRandomCavities) {
  oracle::Rng rng(77);
  FresnelPropagator prop;
  for (int trial = 0; trial < 40; ++trial) {
    const auto [l1, l2] = oracle::upper_domain_geometry(rng);
    const AbcdMatrix m = round_trip_matrix({l1, l2, 1.0});
    const auto beam = GaussianBeam::normalized(eigenmode_q(m), kLambda, 0.0, 0.0);
    const double w = beam.spot_size(kLambda);
    const auto displaced = GaussianBeam::normalized(beam.q, kLambda, rng.uniform(-1, 1) * w, 0.0);
    const auto in = displaced.sample(Grid1D::centered(2048, 16 * w / 2048), kLambda);
    const auto out = prop.apply(in, m);
    ASSERT_NEAR(out.norm_squared(), in.norm_squared(), 1e-10) << l1 << " " << l2;
  }
}

// ---- split-step engine ----

TEST(SplitStep, PureKineticIsFreeDiffraction) {
  const double w0 = 1e-2;
  const double theta = 1.875, b = 0.3;
  const double z = b * theta / std::sin(theta);
  for (auto scheme : {SplitScheme::strang, SplitScheme::exact_quadratic}) {
    const auto in = gaussian_field(w0, 4096, 16 * w0);
    const auto out = split_step_round_trip(in, theta, b, 0.0, in.wavenumber(), 4, scheme);
    ComplexField ref = out;
    for (std::size_t k = 0; k < out.size(); ++k) {
      ref.samples[k] = oracle::diffracted_gaussian(out.x(k), w0, z, kLambda);
    }
    EXPECT_LT(phase_aligned_distance(out, ref), 1e-8);
  }
}

TEST(SplitStep, EigenmodeAndNorm) {
  const auto s = reference(0.0);
  const AbcdMatrix m = s.matrix_at(0.0);
  const auto beam = initial_eigenmode(s, kLambda);
  const auto in = beam.sample(collapse_grid(beam, kLambda, {}), kLambda);
  SplitStepPropagator split;
  ComplexField psi = in;
  for (int trip = 1; trip <= 100; ++trip) psi = split.apply(psi, s.theta(), m.b, m.c, 8);
  EXPECT_NEAR(psi.norm_squared(), in.norm_squared(), 1e-8);
  EXPECT_NEAR(spot_size(psi), beam.spot_size(kLambda), 1e-4 * beam.spot_size(kLambda));
  EXPECT_LT(overlap_deficit(psi, in), 1e-6);

  // Strang is second order: one trip error falls ~4x per doubling.
  const auto ref = split.apply(in, s.theta(), m.b, m.c, 8);
  const auto displaced = GaussianBeam::normalized(beam.q, kLambda, beam.spot_size(kLambda), 0.0);
  const auto d_in = displaced.sample(in.grid(), kLambda);
  const auto exact = displaced.transformed(m).sample(in.grid(), kLambda);
  SplitStepPropagator strang(SplitScheme::strang);
  const double e4 = phase_aligned_distance(strang.apply(d_in, s.theta(), m.b, m.c, 4), exact);
  const double e8 = phase_aligned_distance(strang.apply(d_in, s.theta(), m.b, m.c, 8), exact);
  EXPECT_GT(e4 / e8, 3.5);
  EXPECT_LT(e4 / e8, 4.5);
  EXPECT_LT(phase_aligned_distance(split.apply(d_in, s.theta(), m.b, m.c, 8), exact), 1e-8);
  (void)ref;
}

TEST(SplitStep, Errors) {
  const auto in = gaussian_field(1e-2, 256, 0.16);
  EXPECT_THROW(split_step_round_trip(in, 0.0, -0.9, 1.0, in.wavenumber(), 4), NearInstabilityError);
  EXPECT_THROW(split_step_round_trip(in, 1.0, -0.9, 1.0, 2 * in.wavenumber(), 4), ValidationError);
  EXPECT_THROW(split_step_round_trip(in, 1.0, -0.9, 1.0, in.wavenumber(), 0), ValidationError);
}

TEST(SplitStep, CoefficientsFromCavity) {
  const double k = 2 * kPi / kLambda;
  const auto co = cavity_schrodinger_coefficients(1.875, -0.91, 1.0, k);
  EXPECT_NEAR(co.kinetic, -0.91 * 1.875 / (2 * k * std::sin(1.875)), 1e-18);
  EXPECT_NEAR(co.potential, k * 1.875 / (2 * std::sin(1.875)), 1e-6);
}

// ---- collapse runs ----

TEST(Collapse, AnalyticEngineFollowsClassicalLaw) {
  const double gamma = 1e-3;
  const auto s = reference(gamma);
  CollapseOptions o;
  o.n_max = 3000;
  const auto tr = run_collapse(s, initial_eigenmode(s, kLambda), kLambda, o);
  ASSERT_EQ(tr.rows.size(), 3001u);
  const auto sol = fundamental_solutions({s.theta(), FrictionProfile::constant(gamma)});
  const double w10 = tr.rows.front().w1;
  const double product = conjugate_spot_product(kLambda, 1.0, s.theta());
  double worst = 0.0;
  for (const auto& r : tr.rows) {
    const auto st = sol(static_cast<double>(r.n));
    const double law = std::sqrt(st.u2 * st.u2 + s.theta() * s.theta() * st.u1 * st.u1);
    worst = std::max(worst, std::abs(r.w1 / w10 - law));
    ASSERT_NEAR(r.w1_mode * r.w2_mode / product, 1.0, 1e-6);
    ASSERT_NEAR(r.w1 * r.w2 / product, 1.0, 1e-3);
    ASSERT_NEAR(r.norm, 1.0, 1e-9);
  }
  EXPECT_LT(worst, 1e-3);
  // w1 shrinks, w2 grows.
  EXPECT_LT(tr.rows.back().w1, 0.3 * w10);
  EXPECT_GT(tr.rows.back().w2, 3.0 * tr.rows.front().w2);

  // log-slope of w1 is -gamma/2
  std::vector<double> ns, logs;
  for (const auto& r : tr.rows) {
    ns.push_back(static_cast<double>(r.n));
    logs.push_back(std::log(r.w1));
  }
  EXPECT_NEAR(least_squares_line(ns, logs).slope, -gamma / 2, 0.02 * gamma / 2);
}

TEST(Collapse, NoFrictionNoChange) {
  const auto s = reference(0.0);
  CollapseOptions o;
  o.n_max = 200;
  const auto tr = run_collapse(s, initial_eigenmode(s, kLambda), kLambda, o);
  for (const auto& r : tr.rows) {
    EXPECT_NEAR(r.w1, tr.rows.front().w1, 1e-12 * r.w1);
    EXPECT_NEAR(r.w1, r.w1_mode, 1e-12 * r.w1);
  }
  o.n_max = 0;
  EXPECT_EQ(run_collapse(s, initial_eigenmode(s, kLambda), kLambda, o).rows.size(), 1u);
}

TEST(Collapse, QTraceMatchesBeamEngine) {
  const auto s = reference(1e-3);
  const auto beam = initial_eigenmode(s, kLambda);
  const auto rows = gaussian_q_trace(s, beam.q, 500, kLambda);
  CollapseOptions o;
  o.n_max = 500;
  const auto tr = run_collapse(s, beam, kLambda, o);
  for (std::size_t n = 0; n <= 500; ++n) {
    ASSERT_NEAR(rows[n].w1, tr.rows[n].w1, 1e-12 * rows[n].w1);
    ASSERT_NEAR(rows[n].w2, tr.rows[n].w2, 1e-12 * rows[n].w2);
    ASSERT_NEAR(rows[n].w1_mode, tr.rows[n].w1_mode, 1e-15);
  }
  EXPECT_THROW(gaussian_q_trace(s, {1.0, -1.0}, 5, kLambda), ValidationError);
}

// Fresnel engine reproduces the analytic q propagation while mirrors move.
TEST(Collapse, FresnelAgreesWithAnalyticEngine) {
  const double gamma = 1e-2;
  const auto s = reference(gamma);
  const auto beam0 = initial_eigenmode(s, kLambda);
  const auto beam = GaussianBeam::normalized(beam0.q, kLambda, 0.5 * beam0.spot_size(kLambda));
  CollapseOptions o;
  o.n_max = 500;
  const auto an = run_collapse(s, beam, kLambda, o);
  o.engine = WaveEngine::fresnel;
  const auto fr = run_collapse(s, beam, kLambda, o);
  ASSERT_FALSE(fr.truncated) << fr.diagnostic;
  ASSERT_EQ(fr.rows.size(), an.rows.size());
  const auto sol = fundamental_solutions({s.theta(), FrictionProfile::constant(gamma)});
  for (std::size_t n = 0; n < an.rows.size(); ++n) {
    const auto& a = an.rows[n];
    const auto& b = fr.rows[n];
    ASSERT_NEAR(b.w1 / a.w1, 1.0, 1e-6) << n;
    ASSERT_NEAR(b.w2 / a.w2, 1.0, 1e-6) << n;
    ASSERT_NEAR(b.centroid, a.centroid, 1e-6 * beam0.spot_size(kLambda)) << n;
    ASSERT_NEAR(b.norm, 1.0, 1e-6);
    const auto st = sol(static_cast<double>(n));
    const double law = std::sqrt(st.u2 * st.u2 + s.theta() * s.theta() * st.u1 * st.u1);
    ASSERT_NEAR(b.w1 / fr.rows.front().w1, law, 0.01 * law);
  }
}

TEST(Collapse, SplitStepAgreesWithFresnel) {
  const double gamma = 1e-2;
  const auto s = reference(gamma);
  const auto beam0 = initial_eigenmode(s, kLambda);
  const auto beam = GaussianBeam::normalized(beam0.q, kLambda, 0.5 * beam0.spot_size(kLambda));
  std::vector<ComplexField> fresnel_fields, split_fields;
  CollapseOptions o;
  o.n_max = 50;
  o.engine = WaveEngine::fresnel;
  o.on_field = [&](std::size_t, const ComplexField& f) { fresnel_fields.push_back(f); };
  run_collapse(s, beam, kLambda, o);
  o.engine = WaveEngine::split_step;
  o.on_field = [&](std::size_t, const ComplexField& f) { split_fields.push_back(f); };
  const auto tr = run_collapse(s, beam, kLambda, o);
  EXPECT_FALSE(tr.resolution_warning_n.has_value());
  ASSERT_EQ(fresnel_fields.size(), 51u);
  ASSERT_EQ(split_fields.size(), 51u);
  for (std::size_t n = 0; n <= 50; n += 2) {
    const auto on_split = resample(fresnel_fields[n], split_fields[n].grid());
    EXPECT_LT(phase_aligned_distance(on_split, split_fields[n]), 1e-3) << n;
  }
}

TEST(Collapse, SplitStepFlagsUnderResolution) {
  const auto s = reference(1e-2);
  CollapseOptions o;
  o.engine = WaveEngine::split_step;
  o.n_max = 800;
  o.grid_n = 1024;
  const auto tr = run_collapse(s, initial_eigenmode(s, kLambda), kLambda, o);
  ASSERT_TRUE(tr.resolution_warning_n.has_value());
  // w1 ~ e^{-gamma n/2} must shrink 1024/16/8 = 8 times: n ~ 2 ln 8 / gamma ~ 416
  EXPECT_GT(*tr.resolution_warning_n, 350u);
  EXPECT_LT(*tr.resolution_warning_n, 480u);
}

TEST(Collapse, SamplingFailureTruncatesTrace) {
  const auto s = reference(1e-3);
  const auto mode = initial_eigenmode(s, kLambda);
  const auto tilted = GaussianBeam::normalized(mode.q, kLambda, 0.0, 0.05);
  CollapseOptions o;
  o.engine = WaveEngine::fresnel;
  o.n_max = 10;
  o.grid_n = 64;
  const auto tr = run_collapse(s, tilted, kLambda, o);
  EXPECT_TRUE(tr.truncated);
  EXPECT_NE(tr.diagnostic.find("suggested N"), std::string::npos);
  EXPECT_LT(tr.rows.size(), 11u);
}

TEST(Collapse, Validation) {
  const auto s = reference(1e-3);
  CollapseOptions o;
  o.grid_n = 1000;
  o.engine = WaveEngine::fresnel;
  EXPECT_THROW(run_collapse(s, initial_eigenmode(s, kLambda), kLambda, o), ValidationError);
  const auto f = gaussian_field(1e-2, 64, 0.16);
  o.grid_n = 64;
  o.engine = WaveEngine::gaussian_q;
  EXPECT_THROW(run_collapse(s, f, o), ValidationError);
  EXPECT_EQ(engine_from_string("split_step"), WaveEngine::split_step);
  EXPECT_STREQ(to_string(WaveEngine::gaussian_q), "gaussian_q");
  EXPECT_THROW(engine_from_string("bpm"), ValidationError);
}

// ---- snapshots ----

TEST(Snapshot, RoundTripAndByteOrder) {
  ComplexField f{{Complex(1.0, -2.5), Complex(0.1, 1e-300), Complex(-0.0, 3.0), Complex(7, 8)},
                 1e-5,
                 -2e-5,
                 kLambda,
                 PlaneTag::right_mirror};
  const std::string data = encode_snapshot_data(f);
  ASSERT_EQ(data.size(), 64u);
  // 1.0 = 0x3FF0000000000000, little-endian
  EXPECT_EQ(static_cast<unsigned char>(data[6]), 0xF0);
  EXPECT_EQ(static_cast<unsigned char>(data[7]), 0x3F);
  const auto side = snapshot_sidecar(f, 12);
  EXPECT_EQ(side["plane_tag"], "right_mirror");
  EXPECT_EQ(side["count"], 4);
  const auto back = decode_snapshot(data, nlohmann::json::parse(side.dump()));
  EXPECT_EQ(back.n, 12u);
  EXPECT_EQ(back.field.samples, f.samples);
  EXPECT_EQ(back.field.dx, f.dx);
  EXPECT_EQ(back.field.x0, f.x0);
  EXPECT_EQ(back.field.plane, PlaneTag::right_mirror);
  EXPECT_THROW(decode_snapshot(data.substr(1), nlohmann::json::parse(side.dump())), ValidationError);
  EXPECT_THROW(decode_snapshot(data, nlohmann::json::object()), ValidationError);
}
