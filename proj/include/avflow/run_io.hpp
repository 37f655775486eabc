#pragma once

// Run directories: profiles.csv, functionals.csv, particles.csv (particle
// runs) and manifest.json. The manifest carries the resolved scenario,
// model and run options, so a run can be replayed from it alone.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "avflow/csv.hpp"
#include "avflow/errors.hpp"
#include "avflow/profile.hpp"
#include "avflow/runner.hpp"
#include "avflow/scenario.hpp"

namespace avflow {

inline constexpr int kCsvSchema = 1;
inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& profile_columns() {
  static const std::vector<std::string> c = {"method", "t", "x", "rho", "w", "support_lo", "support_hi",
                                             "tau_h", "xi_km", "rho_veh_km", "v_kmh", "vacuum"};
  return c;
}
inline const std::vector<std::string>& functional_columns() {
  static const std::vector<std::string> c = {"t", "tau_h", "mass", "E", "W", "flow_veh_h"};
  return c;
}
inline const std::vector<std::string>& particle_columns() {
  static const std::vector<std::string> c = {"t", "i", "x", "w", "rho"};
  return c;
}

inline json model_json(const ModelParams& p) {
  return {{"n", p.n}, {"a", p.a}, {"b", p.b}, {"R", p.R}, {"sigma", p.sigma}, {"c", p.c}};
}

inline ModelParams model_from_json(const json& j) {
  detail::Reader r(j, "model");
  ModelParams p;
  p.n = r.count("n", 0);
  p.a = r.num("a");
  p.b = r.num("b");
  p.R = r.num("R");
  p.sigma = r.num("sigma");
  p.c = r.num("c");
  r.finish();
  p.validate();
  return p;
}

// NaN has no JSON spelling; it becomes null.
inline json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct RunRequest {
  Method method = Method::particle;
  std::string label;  // defaults to the method name
  RunOptions options;
};

inline void write_profiles(std::ostream& os, const Scenario& sc, const RunResult& res,
                           const std::string& label) {
  CsvWriter w(os, profile_columns());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& g : res.profiles) {
    std::optional<GridProfile> d;
    if (sc.dim) d = to_dimensional(g, *sc.dim);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const bool vac = !(g.rho[i] > 0.0);
      w.row(label, g.t, g.x[i], g.rho[i], g.w[i], g.support_lo, g.support_hi, d ? d->t : nan,
            d ? d->x[i] : nan, d ? d->rho[i] : nan, d ? d->w[i] : nan, vac);
    }
  }
}

inline void write_functionals(std::ostream& os, const Scenario& sc, const RunResult& res) {
  CsvWriter w(os, functional_columns());
  const auto& f = res.functionals;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double tau = sc.dim ? sc.dim->r / sc.dim->v_star * f.t[i] : nan;
    w.row(f.t[i], tau, f.mass[i], f.E[i], f.W[i], i < res.flow.size() ? res.flow[i] : nan);
  }
}

inline void write_particles(std::ostream& os, const RunResult& res) {
  CsvWriter w(os, particle_columns());
  const ParticleSystem ps{Model(res.model)};
  for (const auto& s : res.snapshots) {
    const auto rho = ps.densities(s);
    for (std::size_t i = 0; i < s.size(); ++i) w.row(s.t, i + 1, s.x[i], s.w[i], rho[i]);
  }
}

inline json manifest_json(const Scenario& sc, const RunRequest& req, const RunResult& res,
                          const std::filesystem::path& dir) {
  json m;
  m["csv_schema"] = kCsvSchema;
  m["version"] = kVersion;
  m["label"] = req.label.empty() ? method_name(req.method) : req.label;
  m["method"] = method_name(req.method);
  m["scenario_name"] = sc.name;
  m["scenario"] = sc.to_json();
  m["model"] = model_json(res.model);
  json opts;
  opts["stride"] = req.options.stride;
  opts["t_end"] = req.options.t_end ? json(*req.options.t_end) : json(nullptr);
  opts["model_override"] = req.options.model.has_value();
  m["options"] = opts;
  m["output_dir"] = dir.string();
  m["wall_seconds"] = res.wall_seconds;
  m["steps"] = res.steps;
  m["rejects"] = res.rejects;
  m["rhs_evals"] = res.rhs_evals;
  m["max_cfl"] = res.max_cfl;
  m["mean_flow_veh_h"] = num_or_null(res.mean_flow);
  m["mass_mismatch"] = num_or_null(res.mass_mismatch);
  json files = {"profiles.csv", "functionals.csv"};
  if (!res.snapshots.empty()) files.push_back("particles.csv");
  m["files"] = files;
  return m;
}

namespace detail {
inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + p.string());
  return os;
}
}  // namespace detail

inline void write_run(const std::filesystem::path& dir, const Scenario& sc, const RunRequest& req,
                      const RunResult& res) {
  std::filesystem::create_directories(dir);
  const std::string label = req.label.empty() ? method_name(req.method) : req.label;
  {
    auto os = detail::open_out(dir / "profiles.csv");
    write_profiles(os, sc, res, label);
  }
  {
    auto os = detail::open_out(dir / "functionals.csv");
    write_functionals(os, sc, res);
  }
  if (!res.snapshots.empty()) {
    auto os = detail::open_out(dir / "particles.csv");
    write_particles(os, res);
  }
  auto os = detail::open_out(dir / "manifest.json");
  os << manifest_json(sc, req, res, dir).dump(2) << '\n';
}

// Replays the request stored in a manifest.
inline std::pair<Scenario, RunRequest> request_from_manifest(const json& m,
                                                             const std::filesystem::path& base_dir = {}) {
  if (!m.contains("csv_schema") || m["csv_schema"] != kCsvSchema) {
    throw ConfigError("manifest: unsupported csv_schema");
  }
  Scenario sc = scenario_from_json(m.at("scenario"), base_dir);
  RunRequest req;
  req.method = parse_method(m.at("method").get<std::string>());
  req.label = m.at("label").get<std::string>();
  const json& o = m.at("options");
  req.options.stride = o.at("stride").get<std::size_t>();
  if (!o.at("t_end").is_null()) req.options.t_end = o.at("t_end").get<double>();
  if (o.at("model_override").get<bool>()) req.options.model = model_from_json(m.at("model"));
  return {sc, req};
}

// A run directory read back for comparison.
struct RunRecord {
  std::filesystem::path dir;
  json manifest;
  std::string label;
  std::vector<GridProfile> profiles;  // dimensionless
  CsvTable functionals;
};

inline void require_header(const CsvTable& t, const std::vector<std::string>& want,
                           const std::filesystem::path& p) {
  if (t.header != want) throw ConfigError(p.string() + ": column set does not match csv_schema " +
                                          std::to_string(kCsvSchema));
}

inline std::vector<GridProfile> profiles_from_table(const CsvTable& t) {
  const std::size_t ct = t.column("t"), cx = t.column("x"), cr = t.column("rho"), cw = t.column("w");
  const std::size_t clo = t.column("support_lo"), chi = t.column("support_hi");
  std::vector<GridProfile> out;
  for (const auto& row : t.rows) {
    const double time = parse_double(row[ct]);
    if (out.empty() || out.back().t != time) {
      GridProfile g;
      g.t = time;
      g.support_lo = parse_double(row[clo]);
      g.support_hi = parse_double(row[chi]);
      out.push_back(std::move(g));
    }
    auto& g = out.back();
    g.x.push_back(parse_double(row[cx]));
    g.rho.push_back(parse_double(row[cr]));
    g.w.push_back(parse_double(row[cw]));
  }
  for (const auto& g : out) g.validate();
  return out;
}

inline RunRecord read_run(const std::filesystem::path& dir) {
  RunRecord r;
  r.dir = dir;
  r.manifest = read_json_file(dir / "manifest.json");
  if (!r.manifest.contains("csv_schema") || r.manifest["csv_schema"] != kCsvSchema) {
    throw ConfigError(dir.string() + ": csv_schema differs from " + std::to_string(kCsvSchema));
  }
  r.label = r.manifest.at("label").get<std::string>();
  const CsvTable prof = read_csv((dir / "profiles.csv").string());
  require_header(prof, profile_columns(), dir / "profiles.csv");
  r.profiles = profiles_from_table(prof);
  r.functionals = read_csv((dir / "functionals.csv").string());
  require_header(r.functionals, functional_columns(), dir / "functionals.csv");
  return r;
}

// Two runs are comparable when they share the physics: units, dimensional
// constants, initial data and the model's b, R, sigma, c. Numerics may differ.
inline std::optional<std::string> physics_mismatch(const RunRecord& a, const RunRecord& b) {
  const json& sa = a.manifest.at("scenario");
  const json& sb = b.manifest.at("scenario");
  for (const char* k : {"units", "density", "speed"}) {
    if (sa.value(k, json()) != sb.value(k, json())) return std::string("scenario key '") + k + "' differs";
  }
  if (sa.value("dimensional", json()) != sb.value("dimensional", json())) {
    return std::string("scenario key 'dimensional' differs");
  }
  const json& ma = a.manifest.at("model");
  const json& mb = b.manifest.at("model");
  for (const char* k : {"b", "R", "sigma", "c"}) {
    if (ma.at(k) != mb.at(k)) return std::string("model key '") + k + "' differs";
  }
  return std::nullopt;
}

}  // namespace avflow
