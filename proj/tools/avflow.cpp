// avflow: run, compare and benchmark the traffic-fluid solvers.
//
//   avflow run --method particle --scenario academic
//   avflow compare runs/academic/particle runs/academic/nm1
//   avflow bench --scenario academic --methods particle,nm1,nm2
//   avflow scenario validate scenarios/traffic.json
//
// Output goes under $AVFLOW_OUTPUT_ROOT (default ./runs) unless --out is given.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "avflow/avflow.hpp"

namespace fs = std::filesystem;
using namespace avflow;

namespace {

fs::path output_root() {
  const char* env = std::getenv("AVFLOW_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::path("runs");
}

// A scenario argument is a file path or the name of a built-in.
struct ScenarioSource {
  json doc;
  fs::path base_dir;
};

ScenarioSource scenario_source(const std::string& spec) {
  if (fs::exists(spec)) return {read_json_file(spec), fs::path(spec).parent_path()};
  if (spec == "academic") return {academic_example().to_json(), {}};
  if (spec == "traffic") return {traffic_scenario().to_json(), {}};
  throw ConfigError("scenario '" + spec + "' is neither a file nor a built-in (academic, traffic)");
}

// Numeric flags shared by run and bench; each maps onto one scenario key
// of the methods it applies to.
struct NumericFlags {
  std::optional<double> atol, rtol, p_factor, dt0, dt_min;
  std::optional<double> dt, dx, dxi, dtau, t_end, v_star;
  std::optional<std::size_t> pad, n;
  std::vector<std::string> sets;
  std::size_t stride = 1;

  void add_to(CLI::App& app) {
    app.add_option("--set", sets, "Scenario override key=value (repeatable), e.g. nm1.dx=0.01");
    app.add_option("--atol", atol, "Stepper absolute tolerance (particle, nm2)");
    app.add_option("--rtol", rtol, "Stepper relative tolerance (particle, nm2)");
    app.add_option("--p-factor", p_factor, "Stepper growth exponent factor (particle, nm2)");
    app.add_option("--dt0", dt0, "Initial step (particle, nm2)");
    app.add_option("--dt-min", dt_min, "Smallest allowed step (particle, nm2)");
    app.add_option("--dt", dt, "Time step (nm1, reduced)");
    app.add_option("--dx", dx, "Cell width (nm1, reduced)");
    app.add_option("--pad", pad, "Vacuum padding cells (nm1, reduced)");
    app.add_option("--dxi", dxi, "ARZ cell width, km");
    app.add_option("--dtau", dtau, "ARZ time step, h");
    app.add_option("--n", n, "Particle count (mass kept by rescaling a) or nm2 node count");
    app.add_option("--t-end", t_end, "Final time in scenario units");
    app.add_option("--v-star", v_star, "Replace the set-point speed v* (km/h)");
    app.add_option("--stride", stride, "Record functionals every k-th step (outputs always)")
        ->check(CLI::PositiveNumber);
  }

  // Overrides for `m`; with strict, flags that do not apply are errors.
  std::vector<std::string> overrides(Method m, bool strict) const {
    std::vector<std::string> out = sets;
    auto put = [&](const char* flag, const std::optional<double>& v, std::initializer_list<Method> ok,
                   const std::string& key) {
      if (!v) return;
      const bool fits = std::find(ok.begin(), ok.end(), m) != ok.end();
      if (!fits) {
        if (strict) throw ConfigError(std::string("flag ") + flag + " does not apply to method " + method_name(m));
        return;
      }
      std::ostringstream os;
      os.precision(17);
      os << method_name(m) << '.' << key << '=' << *v;
      out.push_back(os.str());
    };
    const auto steppers = {Method::particle, Method::nm2};
    const auto grids = {Method::nm1, Method::reduced};
    put("--atol", atol, steppers, "atol");
    put("--rtol", rtol, steppers, "rtol");
    put("--p-factor", p_factor, steppers, "p_factor");
    put("--dt0", dt0, steppers, "dt0");
    put("--dt-min", dt_min, steppers, "dt_min");
    put("--dt", dt, grids, "dt");
    put("--dx", dx, grids, "dx");
    put("--pad", pad ? std::optional<double>(static_cast<double>(*pad)) : std::nullopt, grids, "pad");
    put("--dxi", dxi, {Method::arz}, "dxi");
    put("--dtau", dtau, {Method::arz}, "dtau");
    if (n && m == Method::nm2) out.push_back("nm2.n=" + std::to_string(*n));
    if (n && strict && m != Method::nm2 && m != Method::particle) {
      throw ConfigError(std::string("flag --n does not apply to method ") + method_name(m));
    }
    return out;
  }

  std::pair<Scenario, RunOptions> resolve(const std::string& spec, Method m, bool strict) const {
    ScenarioSource src = scenario_source(spec);
    for (const auto& o : overrides(m, strict)) apply_override(src.doc, o);
    Scenario sc = scenario_from_json(src.doc, src.base_dir);
    if (v_star) sc = with_v_star(sc, *v_star);
    RunOptions opts;
    opts.stride = stride;
    opts.t_end = t_end;
    if (n && m == Method::particle) opts.model = rescaled(sc.model, *n);
    return {sc, opts};
  }
};

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_method(item));
  }
  if (out.empty()) throw ConfigError("no methods given");
  return out;
}

void print_summary(const RunRequest& req, const RunResult& r, const fs::path& dir) {
  std::cout << method_name(req.method) << ": " << r.steps << " steps";
  if (r.rejects) std::cout << " (" << r.rejects << " rejected)";
  std::cout << ", " << r.wall_seconds << " s";
  if (std::isfinite(r.mean_flow)) std::cout << ", mean flow " << r.mean_flow << " veh/h";
  std::cout << "\n  -> " << dir.string() << '\n';
}

int cmd_run(const std::string& spec, const std::string& method, const std::string& replay,
            const std::string& label, const std::string& out, const NumericFlags& flags) {
  Scenario sc;
  RunRequest req;
  if (!replay.empty()) {
    const fs::path mp = fs::is_directory(replay) ? fs::path(replay) / "manifest.json" : fs::path(replay);
    auto [s, r] = request_from_manifest(read_json_file(mp), mp.parent_path());
    sc = std::move(s);
    req = std::move(r);
  } else {
    if (spec.empty()) throw ConfigError("run needs --scenario (or --replay)");
    req.method = parse_method(method);
    auto [s, o] = flags.resolve(spec, req.method, true);
    sc = std::move(s);
    req.options = o;
  }
  if (!label.empty()) req.label = label;
  const fs::path dir = out.empty()
                           ? output_root() / sc.name / (req.label.empty() ? method_name(req.method) : req.label)
                           : fs::path(out);
  const RunResult r = run_method(req.method, sc, req.options);
  write_run(dir, sc, req, r);
  print_summary(req, r, dir);
  return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out, double spacing,
                bool force) {
  if (dirs.size() < 2) throw ConfigError("compare needs at least two run directories");
  std::vector<RunRecord> runs;
  for (const auto& d : dirs) runs.push_back(read_run(d));
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (auto why = physics_mismatch(runs[0], runs[i]); why && !force) {
      throw ConfigError(runs[0].dir.string() + " vs " + runs[i].dir.string() + ": " + *why +
                        " (use --force to compare anyway)");
    }
  }
  std::map<std::string, int> seen;
  for (auto& r : runs) {
    if (seen[r.label]++ > 0) r.label += "#" + std::to_string(seen[r.label]);
  }
  const fs::path dir = out.empty() ? output_root() / runs[0].manifest.value("scenario_name", "unnamed") / "compare"
                                   : fs::path(out);
  fs::create_directories(dir / "series");
  std::ofstream os(dir / "diffs.csv", std::ios::binary);
  if (!os) throw ConfigError("cannot write " + (dir / "diffs.csv").string());
  CsvWriter w(os, {"t", "metric", "method_a", "method_b", "value"});
  std::size_t emitted = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      const RunRecord& a = runs[i];
      const RunRecord& b = runs[j];
      std::map<std::string, std::vector<std::pair<double, double>>> series;
      auto emit = [&](double t, const std::string& metric, double v) {
        w.row(t, metric, a.label, b.label, v);
        series[metric].emplace_back(t, v);
        ++emitted;
      };
      for (const auto& ga : a.profiles) {
        for (const auto& gb : b.profiles) {
          if (std::abs(ga.t - gb.t) > 1e-9 * std::max(1.0, std::abs(ga.t))) continue;
          emit(ga.t, "rho_sup", supnorm_diff(ga, gb, Field::rho, spacing));
          emit(ga.t, "w_sup", supnorm_diff(ga, gb, Field::w, spacing));
        }
      }
      // functional gaps at rows both runs recorded
      const auto& fa = a.functionals;
      const auto& fb = b.functionals;
      std::map<double, std::size_t> rows_b;
      for (std::size_t k = 0; k < fb.rows.size(); ++k) rows_b[parse_double(fb.rows[k][0])] = k;
      for (const auto& ra : fa.rows) {
        const double t = parse_double(ra[0]);
        const auto it = rows_b.find(t);
        if (it == rows_b.end()) continue;
        const auto& rb = fb.rows[it->second];
        for (const char* metric : {"mass", "E", "W"}) {
          const double va = parse_double(ra[fa.column(metric)]);
          const double vb = parse_double(rb[fb.column(metric)]);
          if (std::isnan(va) || std::isnan(vb)) continue;
          emit(t, std::string(metric) + "_abs", std::abs(va - vb));
        }
      }
      for (const auto& [metric, pts] : series) {
        std::ofstream ss(dir / "series" / (metric + "__" + a.label + "__" + b.label + ".csv"), std::ios::binary);
        CsvWriter sw(ss, {"t", "value"});
        auto sorted = pts;
        std::sort(sorted.begin(), sorted.end());
        for (const auto& [t, v] : sorted) sw.row(t, v);
      }
    }
  }
  std::cout << "compared " << runs.size() << " runs, " << emitted << " rows\n  -> " << (dir / "diffs.csv").string()
            << '\n';
  return 0;
}

int cmd_bench(const std::string& spec, const std::string& methods, std::size_t repeats, const std::string& out,
              const NumericFlags& flags) {
  if (repeats == 0) throw ConfigError("--repeats must be >= 1");
  const std::vector<Method> ms = parse_methods(methods);
  struct Row {
    Method m;
    std::vector<double> walls;
    std::size_t steps = 0;
  };
  std::vector<Row> rows;
  std::string name;
  for (Method m : ms) {
    auto [sc, opts] = flags.resolve(spec, m, false);
    name = sc.name;
    opts.observe = false;
    Row row{m, {}, 0};
    for (std::size_t k = 0; k < repeats; ++k) {
      const RunResult r = run_method(m, sc, opts);
      row.walls.push_back(r.wall_seconds);
      row.steps = r.steps;
      std::cout << method_name(m) << " #" << k + 1 << ": " << r.wall_seconds << " s, " << r.steps << " steps\n";
    }
    rows.push_back(std::move(row));
  }
  const fs::path dir = out.empty() ? output_root() / name / "bench" : fs::path(out);
  fs::create_directories(dir);
  std::ofstream os(dir / "bench.csv", std::ios::binary);
  if (!os) throw ConfigError("cannot write " + (dir / "bench.csv").string());
  CsvWriter w(os, {"method", "repeat", "wall_seconds", "steps", "median_wall_seconds"});
  std::vector<std::pair<double, Method>> medians;
  for (const auto& r : rows) {
    const double med = median(r.walls);
    medians.emplace_back(med, r.m);
    for (std::size_t k = 0; k < r.walls.size(); ++k) w.row(method_name(r.m), k + 1, r.walls[k], r.steps, med);
  }
  std::sort(medians.begin(), medians.end());
  std::cout << "median wall time ordering:";
  for (const auto& [t, m] : medians) std::cout << ' ' << method_name(m) << " (" << t << " s)";
  std::cout << '\n';
  const auto particle = std::find_if(medians.begin(), medians.end(),
                                     [](const auto& p) { return p.second == Method::particle; });
  if (particle != medians.end() && medians.size() > 1) {
    std::cout << (particle == medians.begin() ? "particle method is fastest\n"
                                              : "particle method is NOT fastest\n");
  }
  std::cout << "  -> " << (dir / "bench.csv").string() << '\n';
  return 0;
}

int cmd_validate(const std::string& spec, const std::vector<std::string>& sets, bool print) {
  ScenarioSource src = scenario_source(spec);
  for (const auto& o : sets) apply_override(src.doc, o);
  const Scenario sc = scenario_from_json(src.doc, src.base_dir);
  if (print) {
    std::cout << sc.to_json().dump(2) << '\n';
    return 0;
  }
  const Placement pl = place_particles(sc, sc.model);
  std::cout << "scenario '" << sc.name << "' is valid (" << (sc.dimensional_units ? "dimensional" : "dimensionless")
            << " units)\n"
            << "  model: n=" << sc.model.n << " a=" << sc.model.a << " b=" << sc.model.b << " R=" << sc.model.R
            << " sigma=" << sc.model.sigma << " c=" << sc.model.c << '\n'
            << "  initial mass " << pl.profile_mass << ", particle mass " << pl.particle_mass << " (mismatch "
            << pl.mismatch() << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle method and comparison solvers for an automated-vehicle traffic fluid"};
  app.require_subcommand(1);

  NumericFlags run_flags;
  std::string run_scenario, run_method_name = "particle", run_replay, run_label, run_out;
  auto* run = app.add_subcommand("run", "Run one method on a scenario");
  run->add_option("--scenario,-s", run_scenario, "Scenario file or built-in name (academic, traffic)");
  run->add_option("--method,-m", run_method_name, "particle, nm1, nm2, reduced or arz");
  run->add_option("--replay", run_replay, "Rerun from a manifest.json (or its directory)");
  run->add_option("--label", run_label, "Run label (default: method name)");
  run->add_option("--out,-o", run_out, "Output directory");
  run_flags.add_to(*run);

  std::vector<std::string> cmp_dirs;
  std::string cmp_out;
  double cmp_spacing = 0.0;
  bool cmp_force = false;
  auto* cmp = app.add_subcommand("compare", "Pairwise differences between finished runs");
  cmp->add_option("dirs", cmp_dirs, "Run directories")->required()->expected(2, -1);
  cmp->add_option("--out,-o", cmp_out, "Output directory");
  cmp->add_option("--spacing", cmp_spacing, "Comparison grid spacing (default: finer median spacing)");
  cmp->add_flag("--force", cmp_force, "Compare runs whose physics differ");

  NumericFlags bench_flags;
  std::string bench_scenario = "academic", bench_methods = "particle,nm1,nm2", bench_out;
  std::size_t bench_repeats = 3;
  auto* bench = app.add_subcommand("bench", "Median wall time of each method, recording off");
  bench->add_option("--scenario,-s", bench_scenario, "Scenario file or built-in name");
  bench->add_option("--methods", bench_methods, "Comma separated methods");
  bench->add_option("--repeats", bench_repeats, "Runs per method");
  bench->add_option("--out,-o", bench_out, "Output directory");
  bench_flags.add_to(*bench);

  auto* scn = app.add_subcommand("scenario", "Scenario utilities");
  scn->require_subcommand(1);
  std::string val_spec;
  std::vector<std::string> val_sets;
  bool val_print = false;
  auto* val = scn->add_subcommand("validate", "Check a scenario and report its derived constants");
  val->add_option("scenario", val_spec, "Scenario file or built-in name")->required();
  val->add_option("--set", val_sets, "Override key=value (repeatable)");
  val->add_flag("--print", val_print, "Print the resolved scenario as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_scenario, run_method_name, run_replay, run_label, run_out, run_flags);
    if (*cmp) return cmd_compare(cmp_dirs, cmp_out, cmp_spacing, cmp_force);
    if (*bench) return cmd_bench(bench_scenario, bench_methods, bench_repeats, bench_out, bench_flags);
    if (*val) return cmd_validate(val_spec, val_sets, val_print);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "solver aborted: " << e.what() << '\n';
    return 3;
  } catch (const SolverError& e) {
    std::cerr << "solver aborted: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
