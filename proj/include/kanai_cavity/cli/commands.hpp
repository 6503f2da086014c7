#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "kanai_cavity/cli/config.hpp"
#include "kanai_cavity/io/output.hpp"
#include "kanai_cavity/kanai.hpp"
#include "kanai_cavity/raysim.hpp"
#include "kanai_cavity/schedule.hpp"
#include "kanai_cavity/wavesim/collapse.hpp"
#include "kanai_cavity/wavesim/snapshot.hpp"

namespace kanai_cavity::cli {

using io::CsvBuilder;
using io::OutputSet;
using ojson = nlohmann::ordered_json;

namespace detail {

inline std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

inline unsigned resolve_jobs(unsigned jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Sample points 0, step, 2 step, ... up to and including n_max.
inline std::vector<double> sample_points(double n_max, double step) {
  std::vector<double> ns;
  const auto count = static_cast<std::size_t>(std::floor(n_max / step + 1e-9));
  for (std::size_t k = 0; k <= count; ++k) ns.push_back(std::min(n_max, static_cast<double>(k) * step));
  return ns;
}

inline MirrorSchedule make_schedule(const ScenarioConfig& c) {
  return MirrorSchedule(c.resonator(), c.friction_profile());
}

}  // namespace detail

inline OutputSet cmd_stability(const ScenarioConfig& c, unsigned jobs = 1) {
  OutputSet out;
  const StabilityMap map = stability_map(c.stability, detail::resolve_jobs(jobs));
  const StabilityGrid& g = map.grid;
  std::size_t stable_cells = 0;
  if (c.wants("csv")) {
    CsvBuilder csv({"l1_over_f", "l2_over_f", "stable", "marginal", "theta"});
    for (std::size_t i = 0; i < g.n1; ++i) {
      for (std::size_t j = 0; j < g.n2; ++j) {
        const std::size_t k = map.index(i, j);
        csv.row({g.l1_at(i), g.l2_at(j), static_cast<bool>(map.stable[k]), static_cast<bool>(map.marginal[k]),
                 map.theta[k]});
      }
    }
    out.add("stability.csv", csv.str());
  }
  for (auto s : map.stable) stable_cells += s;

  // Path of the mirror schedule across the diagram, when there is one.
  try {
    const MirrorSchedule s = detail::make_schedule(c);
    if (c.wants("csv")) {
      CsvBuilder path({"n", "g", "l1_over_f", "l2_over_f"});
      for (double n : detail::sample_points(static_cast<double>(c.run.n_max), c.schedule.n_step)) {
        const auto [l1, l2] = s.positions_at(n);
        path.row({n, s.friction().g(n), l1, l2});
      }
      out.add("schedule_path.csv", path.str());
    }
  } catch (const InvalidSchedule& e) {
    out.notes.push_back(std::string("no schedule overlay: ") + e.what());
  }

  if (c.wants("json")) {
    ojson j;
    j["n_l1"] = g.n1;
    j["n_l2"] = g.n2;
    j["stable_cells"] = stable_cells;
    j["connected_components"] = map.connected_components();
    out.add("stability_summary.json", detail::dump(j));
  }
  return out;
}

inline OutputSet cmd_schedule(const ScenarioConfig& c) {
  OutputSet out;
  const MirrorSchedule s = detail::make_schedule(c);
  CsvBuilder csv({"n", "g", "l1_over_f", "l2_over_f", "a", "b_over_f", "c_times_f"});
  for (double n : detail::sample_points(static_cast<double>(c.run.n_max), c.schedule.n_step)) {
    const auto [l1, l2] = s.positions_at(n);
    const AbcdMatrix m = s.matrix_at(n);
    csv.row({n, s.friction().g(n), l1, l2, m.a, m.b, m.c});
  }
  if (c.wants("csv")) out.add("schedule.csv", csv.str());
  if (c.wants("json")) {
    ojson j;
    j["theta"] = s.theta();
    j["cos_theta"] = s.cos_theta();
    j["b0_over_f"] = s.b0();
    j["c0_times_f"] = s.c0();
    out.add("schedule_summary.json", detail::dump(j));
  }
  return out;
}

inline OutputSet cmd_ray(const ScenarioConfig& c) {
  OutputSet out;
  const MirrorSchedule s = detail::make_schedule(c);
  const RayTrace tr = iterate_ray(s, {c.ray.x0, c.ray.xp0}, c.run.n_max);
  const auto xs = tr.positions();
  ojson fit;
  fit["decay_rate"] = fit_envelope_decay(xs);
  fit["period"] = fit_period(xs);
  fit["theta"] = s.theta();
  if (c.wants("csv")) {
    CsvBuilder csv({"n", "x", "xp"});
    for (const auto& smp : tr.samples) csv.row({smp.n, smp.ray.x, smp.ray.xp});
    out.add("ray_trace.csv", csv.str());
  }
  if (c.wants("json")) out.add("ray_fit.json", detail::dump(fit));
  return out;
}

inline OutputSet cmd_lissajous(const ScenarioConfig& c) {
  OutputSet out;
  const MirrorSchedule s = detail::make_schedule(c);
  const auto pts = lissajous(s, {c.ray.x0, c.ray.xp0, c.ray.y0, c.ray.yp0}, c.run.n_max);
  const auto env = radius_envelope(pts, s.theta());
  if (env.size() < 2) throw ValidationError("lissajous: run.n_max too short for two envelope windows");
  std::vector<double> xs;
  for (const auto& p : pts) xs.push_back(p.x);
  bool decreasing = true;
  for (std::size_t k = 1; k < env.size(); ++k) decreasing = decreasing && env[k].r_max < env[k - 1].r_max;
  ojson fit;
  fit["decay_rate"] = -envelope_log_slope(env);
  fit["period"] = fit_period(xs);
  fit["theta"] = s.theta();
  fit["envelope_windows"] = env.size();
  fit["envelope_strictly_decreasing"] = decreasing;
  if (c.wants("csv")) {
    CsvBuilder csv({"n", "x", "xp", "y", "yp", "r"});
    for (const auto& p : pts) csv.row({p.n, p.x, p.xp, p.y, p.yp, p.radius()});
    out.add("lissajous.csv", csv.str());
    CsvBuilder e({"window_start", "n_at_max", "r_max"});
    for (const auto& w : env) e.row({w.window_start, w.n_at_max, w.r_max});
    out.add("lissajous_envelope.csv", e.str());
  }
  if (c.wants("json")) out.add("lissajous_fit.json", detail::dump(fit));
  return out;
}

namespace detail {

struct EngineRun {
  CollapseTrace trace;
  OutputSet snapshots;
};

inline EngineRun run_engine(const ScenarioConfig& c, const MirrorSchedule& s, WaveEngine engine) {
  const double lambda = c.geometry.lambda_over_f;
  CollapseOptions o;
  o.engine = engine;
  o.n_max = c.run.n_max;
  o.grid_n = c.run.grid_n;
  o.window_factor = c.run.window_factor;
  o.substeps = c.run.substeps;
  o.scheme = c.run.scheme;
  EngineRun r;
  if (c.wants("snapshots") && engine != WaveEngine::gaussian_q) {
    o.on_field = [&](std::size_t n, const ComplexField& f) {
      if (n % c.outputs.snapshot_every != 0 && n != c.run.n_max) return;
      char base[64];
      std::snprintf(base, sizeof base, "snapshots/%s_%07zu", to_string(engine), n);
      r.snapshots.add(std::string(base) + ".bin", encode_snapshot_data(f));
      r.snapshots.add(std::string(base) + ".json", dump(snapshot_sidecar(f, n)));
    };
  }
  r.trace = run_collapse(s, initial_eigenmode(s, lambda), lambda, o);
  return r;
}

}  // namespace detail

/// Spot sizes in units of w0 = sqrt(lambda f / pi). `product` is the
/// conjugate-plane product of the instantaneous cavity mode, `beam_product`
/// that of the propagated beam.
inline OutputSet cmd_collapse(const ScenarioConfig& c, unsigned jobs = 1) {
  OutputSet out;
  const MirrorSchedule s = detail::make_schedule(c);
  const double w0 = std::sqrt(c.geometry.lambda_over_f / std::numbers::pi);
  const auto& engines = c.run.engines;

  std::vector<detail::EngineRun> runs(engines.size());
  const unsigned workers = std::min<unsigned>(detail::resolve_jobs(jobs), static_cast<unsigned>(engines.size()));
  if (workers <= 1) {
    for (std::size_t e = 0; e < engines.size(); ++e) runs[e] = detail::run_engine(c, s, engines[e]);
  } else {
    std::vector<std::future<detail::EngineRun>> fut;
    for (WaveEngine e : engines) fut.push_back(std::async(std::launch::async, detail::run_engine, std::cref(c), std::cref(s), e));
    for (std::size_t e = 0; e < engines.size(); ++e) runs[e] = fut[e].get();
  }

  ojson report;
  report["w0"] = w0;
  report["theta"] = s.theta();
  report["mode_product_law"] = std::sqrt((1.0 - s.cos_theta()) / 2.0);
  ojson per = ojson::object();
  for (std::size_t e = 0; e < engines.size(); ++e) {
    const CollapseTrace& tr = runs[e].trace;
    const std::string name = to_string(engines[e]);
    if (c.wants("csv")) {
      CsvBuilder csv({"n", "w1_over_w0", "w2_over_w0", "product", "beam_product", "norm", "centroid_over_w0",
                      "w1_mode_over_w0", "w2_mode_over_w0"});
      for (const auto& r : tr.rows) {
        csv.row({r.n, r.w1 / w0, r.w2 / w0, r.w1_mode * r.w2_mode / (w0 * w0), r.w1 * r.w2 / (w0 * w0), r.norm,
                 r.centroid / w0, r.w1_mode / w0, r.w2_mode / w0});
      }
      out.add("collapse_" + name + ".csv", csv.str());
    }
    for (auto& f : runs[e].snapshots.files) out.add(std::move(f.first), std::move(f.second));
    ojson j;
    j["rows"] = tr.rows.size();
    j["truncated"] = tr.truncated;
    if (tr.truncated) {
      j["diagnostic"] = tr.diagnostic;
      out.notes.push_back(name + " trace truncated: " + tr.diagnostic);
    }
    j["resolution_warning_n"] = tr.resolution_warning_n ? ojson(*tr.resolution_warning_n) : ojson(nullptr);
    if (tr.resolution_warning_n) {
      out.notes.push_back(name + ": spot narrower than 8 pixels from round trip " +
                          std::to_string(*tr.resolution_warning_n));
    }
    per[name] = j;
  }
  report["engines"] = per;

  if (engines.size() > 1) {
    // Largest relative w1, w2 differences against the first engine over the
    // rows both traces reached.
    ojson cmp = ojson::array();
    const CollapseTrace& ref = runs[0].trace;
    for (std::size_t e = 1; e < engines.size(); ++e) {
      const CollapseTrace& tr = runs[e].trace;
      const std::size_t rows = std::min(ref.rows.size(), tr.rows.size());
      double dw1 = 0.0, dw2 = 0.0, dc = 0.0;
      for (std::size_t k = 0; k < rows; ++k) {
        dw1 = std::max(dw1, std::abs(tr.rows[k].w1 / ref.rows[k].w1 - 1.0));
        dw2 = std::max(dw2, std::abs(tr.rows[k].w2 / ref.rows[k].w2 - 1.0));
        dc = std::max(dc, std::abs(tr.rows[k].centroid - ref.rows[k].centroid) / w0);
      }
      cmp.push_back({{"reference", to_string(engines[0])},
                     {"engine", to_string(engines[e])},
                     {"rows_compared", rows},
                     {"max_rel_w1", dw1},
                     {"max_rel_w2", dw2},
                     {"max_centroid_over_w0", dc}});
    }
    report["comparison"] = cmp;
  }
  if (c.wants("json")) out.add("collapse_report.json", detail::dump(report));
  return out;
}

inline OutputSet cmd_crosscheck(const ScenarioConfig& c) {
  OutputSet out;
  const MirrorSchedule s = detail::make_schedule(c);
  CrosscheckOptions o;
  o.n_max = c.run.n_max;
  o.displacement = c.crosscheck.displacement;
  o.grid_n = c.run.grid_n;
  o.window_factor = c.run.window_factor;
  const CrosscheckReport rep = crosscheck_engines(s, c.geometry.lambda_over_f, o);
  if (c.wants("csv")) {
    CsvBuilder csv({"n", "l2_distance", "centroid_wave", "centroid_analytic", "centroid_ray", "width_wave",
                    "width_analytic"});
    for (const auto& r : rep.rows) {
      csv.row({r.n, r.l2_distance, r.centroid_wave, r.centroid_analytic, r.centroid_ray, r.width_wave,
               r.width_analytic});
    }
    out.add("crosscheck.csv", csv.str());
  }
  if (c.wants("json")) {
    ojson j = to_json(rep);
    j.erase("rows");  // rows go to the CSV
    out.add("crosscheck.json", detail::dump(j));
  }
  return out;
}

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"stability", "schedule", "ray", "lissajous", "collapse", "crosscheck"};
  return names;
}

inline OutputSet run_command(const std::string& name, const ScenarioConfig& c, unsigned jobs = 1) {
  if (name == "stability") return cmd_stability(c, jobs);
  if (name == "schedule") return cmd_schedule(c);
  if (name == "ray") return cmd_ray(c);
  if (name == "lissajous") return cmd_lissajous(c);
  if (name == "collapse") return cmd_collapse(c, jobs);
  if (name == "crosscheck") return cmd_crosscheck(c);
  throw ValidationError("unknown command: " + name);
}

}  // namespace kanai_cavity::cli
