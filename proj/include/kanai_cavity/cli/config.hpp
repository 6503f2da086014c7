#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "kanai_cavity/core/friction.hpp"
#include "kanai_cavity/error.hpp"
#include "kanai_cavity/paraxial.hpp"
#include "kanai_cavity/wavesim/collapse.hpp"

namespace kanai_cavity::cli {

inline constexpr int kSchemaVersion = 1;

struct GeometryConfig {
  double l1_over_f = 1.7;
  double l2_over_f = 1.5;
  double lambda_over_f = 1e-4;
};

struct FrictionConfig {
  std::string kind = "constant";  // constant | table
  double gamma = 1e-3;
  std::filesystem::path table;  // resolved against the config directory
};

struct RunConfig {
  std::size_t n_max = 3000;
  std::vector<WaveEngine> engines{WaveEngine::gaussian_q};
  std::size_t grid_n = 4096;
  double window_factor = 16.0;
  std::size_t substeps = 8;
  SplitScheme scheme = SplitScheme::exact_quadratic;
};

struct ScheduleConfig {
  double n_step = 1.0;
};

struct InitialRay {
  double x0 = 1.0;
  double xp0 = 0.0;
  double y0 = 0.7;
  double yp0 = 0.5;
};

struct CrosscheckConfig {
  double displacement = 0.3;
};

struct OutputConfig {
  std::filesystem::path directory = ".";
  std::set<std::string> formats{"csv", "json"};
  std::size_t snapshot_every = 100;
};

/// Everything a command needs. Parsed from a JSON document; unknown keys are
/// rejected so typos do not silently fall back to defaults.
struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  GeometryConfig geometry;
  FrictionConfig friction;
  RunConfig run;
  StabilityGrid stability;
  ScheduleConfig schedule;
  InitialRay ray;
  CrosscheckConfig crosscheck;
  OutputConfig outputs;

  ResonatorGeometry resonator() const { return {geometry.l1_over_f, geometry.l2_over_f, 1.0}; }

  FrictionProfile friction_profile() const {
    if (friction.kind == "table") return load_friction_csv(friction.table.string());
    return FrictionProfile::constant(friction.gamma);
  }

  bool wants(const std::string& format) const { return outputs.formats.count(format) != 0; }

  void validate() const;
};

namespace detail {

using nlohmann::json;

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ValidationError("config: '" + name_ + "' must be an object");
    for (const auto& [key, _] : j_.items()) unknown_.insert(key);
  }

  template <class T>
  void get(const char* key, T& out) {
    unknown_.erase(key);
    if (!j_.contains(key)) return;
    if constexpr (std::is_unsigned_v<T>) {
      if (const auto& v = j_.at(key); !v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ValidationError("config: '" + name_ + "." + key + "' must be a nonnegative integer");
      }
    }
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError("config: '" + name_ + "." + key + "' has the wrong type");
    }
  }

  const json* child(const char* key) {
    unknown_.erase(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    if (!unknown_.empty()) {
      throw ValidationError("config: unknown key '" + name_ + "." + *unknown_.begin() + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> unknown_;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("config: " + what);
}

inline bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace detail

inline void ScenarioConfig::validate() const {
  using detail::require;
  require(schema_version == kSchemaVersion,
          "unsupported schema_version " + std::to_string(schema_version));
  require(detail::finite_nonneg(geometry.l1_over_f) && detail::finite_nonneg(geometry.l2_over_f),
          "geometry lengths must be finite and >= 0");
  require(std::isfinite(geometry.lambda_over_f) && geometry.lambda_over_f > 0.0 &&
              geometry.lambda_over_f < 1e-2,
          "geometry.lambda_over_f must lie in (0, 1e-2)");
  if (friction.kind == "constant") {
    require(detail::finite_nonneg(friction.gamma), "friction.gamma must be finite and >= 0");
  } else if (friction.kind == "table") {
    require(!friction.table.empty(), "friction.table is required for kind 'table'");
    require(std::filesystem::is_regular_file(friction.table),
            "friction table not found: " + friction.table.string());
  } else {
    throw ValidationError("config: friction.kind must be 'constant' or 'table'");
  }
  require(run.n_max <= 10'000'000, "run.n_max is too large");
  require(!run.engines.empty(), "run.engine must name at least one engine");
  require(is_power_of_two(run.grid_n), "run.grid_n must be a power of two");
  require(std::isfinite(run.window_factor) && run.window_factor > 0.0, "run.window_factor must be > 0");
  require(run.substeps >= 1, "run.substeps must be >= 1");
  stability.validate();
  require(std::isfinite(schedule.n_step) && schedule.n_step > 0.0, "schedule.n_step must be > 0");
  require(std::isfinite(ray.x0) && std::isfinite(ray.xp0) && std::isfinite(ray.y0) && std::isfinite(ray.yp0),
          "ray initial conditions must be finite");
  require(std::isfinite(crosscheck.displacement), "crosscheck.displacement must be finite");
  for (const auto& f : outputs.formats) {
    require(f == "csv" || f == "json" || f == "snapshots", "unknown output format '" + f + "'");
  }
  require(outputs.snapshot_every >= 1, "outputs.snapshot_every must be >= 1");
}

/// Parses and validates. Relative paths are resolved against `base_dir`.
inline ScenarioConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  using detail::ObjectReader;
  ScenarioConfig c;
  ObjectReader top(doc, "config");
  top.get("schema_version", c.schema_version);
  detail::require(doc.contains("schema_version"), "schema_version is required");

  if (const auto* j = top.child("geometry")) {
    ObjectReader s(*j, "geometry");
    s.get("l1_over_f", c.geometry.l1_over_f);
    s.get("l2_over_f", c.geometry.l2_over_f);
    s.get("lambda_over_f", c.geometry.lambda_over_f);
    s.finish();
  }
  if (const auto* j = top.child("friction")) {
    ObjectReader s(*j, "friction");
    s.get("kind", c.friction.kind);
    s.get("gamma", c.friction.gamma);
    std::string table;
    s.get("table", table);
    if (!table.empty()) {
      const std::filesystem::path p(table);
      c.friction.table = p.is_absolute() ? p : base_dir / p;
    }
    s.finish();
  }
  if (const auto* j = top.child("run")) {
    ObjectReader s(*j, "run");
    s.get("n_max", c.run.n_max);
    if (const auto* e = s.child("engine")) {
      std::vector<std::string> names;
      if (e->is_string()) {
        names.push_back(e->get<std::string>());
      } else if (e->is_array()) {
        for (const auto& x : *e) {
          detail::require(x.is_string(), "run.engine entries must be strings");
          names.push_back(x.get<std::string>());
        }
      } else {
        throw ValidationError("config: run.engine must be a string or a list of strings");
      }
      c.run.engines.clear();
      for (const auto& n : names) c.run.engines.push_back(engine_from_string(n));
    }
    s.get("grid_n", c.run.grid_n);
    s.get("window_factor", c.run.window_factor);
    s.get("substeps", c.run.substeps);
    std::string scheme;
    s.get("split_scheme", scheme);
    if (scheme == "strang") {
      c.run.scheme = SplitScheme::strang;
    } else if (!scheme.empty() && scheme != "exact_quadratic") {
      throw ValidationError("config: run.split_scheme must be 'strang' or 'exact_quadratic'");
    }
    s.finish();
  }
  if (const auto* j = top.child("stability")) {
    ObjectReader s(*j, "stability");
    s.get("l1_min", c.stability.l1_min);
    s.get("l1_max", c.stability.l1_max);
    s.get("l2_min", c.stability.l2_min);
    s.get("l2_max", c.stability.l2_max);
    s.get("n_l1", c.stability.n1);
    s.get("n_l2", c.stability.n2);
    s.finish();
  }
  if (const auto* j = top.child("schedule")) {
    ObjectReader s(*j, "schedule");
    s.get("n_step", c.schedule.n_step);
    s.finish();
  }
  if (const auto* j = top.child("ray")) {
    ObjectReader s(*j, "ray");
    s.get("x0", c.ray.x0);
    s.get("xp0", c.ray.xp0);
    s.get("y0", c.ray.y0);
    s.get("yp0", c.ray.yp0);
    s.finish();
  }
  if (const auto* j = top.child("crosscheck")) {
    ObjectReader s(*j, "crosscheck");
    s.get("displacement", c.crosscheck.displacement);
    s.finish();
  }
  if (const auto* j = top.child("outputs")) {
    ObjectReader s(*j, "outputs");
    std::string dir;
    s.get("directory", dir);
    if (!dir.empty()) {
      const std::filesystem::path p(dir);
      c.outputs.directory = p.is_absolute() ? p : base_dir / p;
    }
    std::vector<std::string> formats;
    s.get("formats", formats);
    if (!formats.empty()) c.outputs.formats = {formats.begin(), formats.end()};
    s.get("snapshot_every", c.outputs.snapshot_every);
    s.finish();
  }
  top.finish();
  c.validate();
  return c;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return parse_config(doc, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

}  // namespace kanai_cavity::cli
