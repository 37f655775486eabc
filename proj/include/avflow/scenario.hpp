#pragma once

// Scenario definitions: initial data, model constants and per-method
// numerics, loaded from JSON documents with strict key checking.
//
// A scenario is written either in dimensionless units (x, rho, w, t) or in
// dimensional units (xi km, rho~ veh/km, v~ km/h, hours). Every solver asks
// for the units it integrates in; conversion goes through the
// `dimensional` block.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "avflow/arz.hpp"
#include "avflow/constitutive.hpp"
#include "avflow/csv.hpp"
#include "avflow/errors.hpp"
#include "avflow/nm1_staggered.hpp"
#include "avflow/particle.hpp"
#include "avflow/profile.hpp"
#include "avflow/reduced.hpp"
#include "avflow/stepper.hpp"

namespace avflow {

using json = nlohmann::json;

namespace detail {

// Reads keys out of a JSON object, remembering which ones were consumed so
// leftovers can be reported by their dotted path.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  // Declares an optional key that is handled elsewhere or absent.
  void allow(const std::string& k) { seen_.insert(k); }

  double num(const std::string& k, double def) {
    seen_.insert(k);
    if (!j_.contains(k)) return def;
    return as_num(k);
  }
  double num(const std::string& k) {
    need(k);
    return as_num(k);
  }
  std::size_t count(const std::string& k, std::size_t def) {
    seen_.insert(k);
    if (!j_.contains(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>())) {
      throw ConfigError(key(k) + " must be an integer");
    }
    const double d = v.get<double>();
    if (d < 0) throw ConfigError(key(k) + " must be non-negative");
    return static_cast<std::size_t>(d);
  }
  std::string str(const std::string& k, const std::string& def) {
    seen_.insert(k);
    if (!j_.contains(k)) return def;
    if (!j_.at(k).is_string()) throw ConfigError(key(k) + " must be a string");
    return j_.at(k).get<std::string>();
  }
  std::string str(const std::string& k) {
    need(k);
    return str(k, "");
  }
  std::vector<double> nums(const std::string& k) {
    need(k);
    const auto& v = j_.at(k);
    if (!v.is_array()) throw ConfigError(key(k) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(key(k) + " must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  const json& sub(const std::string& k) {
    need(k);
    return j_.at(k);
  }
  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  // Throws on the first key that was never consumed.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + key(it.key()) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "document" : "'" + path_ + "'"; }
  void need(const std::string& k) {
    seen_.insert(k);
    if (!j_.contains(k)) throw ConfigError("missing key '" + key(k) + "'");
  }
  double as_num(const std::string& k) const {
    const auto& v = j_.at(k);
    if (!v.is_number()) throw ConfigError(key(k) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key(k) + " must be finite");
    return d;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return 0.5 * (1.0 - std::cos(std::numbers::pi * u));
}

}  // namespace detail

// Trapezoid-shaped density with cosine ramps: `base` on (lo, hi) ramping
// up over `ramp` at both ends, plus a plateau of height `peak` on
// [belt_lo, belt_hi] entered through cosine ramps of width `belt_ramp`.
struct BeltShape {
  double lo = 0.0, hi = 4.0, ramp = 0.25;
  double belt_lo = 1.5, belt_hi = 2.75, belt_ramp = 0.25;
  double base = 20.0, peak = 55.0;

  double operator()(double x) const {
    const double edge =
        std::min(detail::smooth_step((x - lo) / ramp), detail::smooth_step((hi - x) / ramp));
    double belt = 1.0;
    if (x < belt_lo) belt = detail::smooth_step((x - (belt_lo - belt_ramp)) / belt_ramp);
    if (x > belt_hi) belt = detail::smooth_step(((belt_hi + belt_ramp) - x) / belt_ramp);
    return base * edge + (peak - base) * belt;
  }
  double mass() const {
    return base * (hi - lo - ramp) + (peak - base) * (belt_hi - belt_lo + belt_ramp);
  }
  // Plateau height giving total mass m.
  double peak_for_mass(double m) const {
    return base + (m - base * (hi - lo - ramp)) / (belt_hi - belt_lo + belt_ramp);
  }
  std::vector<double> breaks() const {
    return {lo + ramp, hi - ramp, belt_lo - belt_ramp, belt_lo, belt_hi, belt_hi + belt_ramp};
  }
  void validate() const {
    if (!(hi > lo) || !(ramp > 0.0) || !(2.0 * ramp <= hi - lo)) throw ConfigError("belt: bad support/ramp");
    if (!(belt_lo - belt_ramp >= lo + ramp) || !(belt_hi + belt_ramp <= hi - ramp) ||
        !(belt_hi > belt_lo) || !(belt_ramp > 0.0)) {
      throw ConfigError("belt: plateau and ramps must sit inside the base level");
    }
    if (!(base >= 0.0) || !(peak >= base)) throw ConfigError("belt: need 0 <= base <= peak");
  }
};

struct StepperSettings {
  double atol = 1e-4, rtol = 1e-4, p_factor = 2.0, dt0 = 1e-4, dt_min = 1e-12;

  StepperConfig config(double t_end) const {
    StepperConfig c;
    c.atol = atol;
    c.rtol = rtol;
    c.p_factor = p_factor;
    c.dt0 = dt0;
    c.dt_min = dt_min;
    c.t_end = t_end;
    c.validate();
    return c;
  }
};

struct Scenario {
  std::string name = "unnamed";
  bool dimensional_units = false;  // units of density / speed / times below
  ModelParams model;
  bool model_has_speed_constants = true;  // b, R, sigma given explicitly
  std::optional<DimensionalParams> dim;
  json density;
  json speed;
  double t_end = 1.0;                 // scenario units (t or hours)
  std::vector<double> output_times;   // scenario units
  StepperSettings particle;
  Nm1Config nm1;
  std::size_t nm2_n = 225;
  StepperSettings nm2;
  ReducedConfig reduced;
  ArzParams arz;
  ArzConfig arz_grid;
  double flow_threshold = 1e-6;  // support threshold relative to max initial density
  double flow_sample = 0.0;      // spacing for mean-flow samples (scenario units; 0: outputs only)
  std::filesystem::path base_dir;

  // ---- derived quantities ------------------------------------------------

  const DimensionalParams& dimensional() const {
    if (!dim) throw ConfigError("scenario '" + name + "' has no 'dimensional' block");
    return *dim;
  }
  ModelParams model_params() const { return model; }
  DimensionalModel dimensional_model() const {
    return DimensionalModel(dimensional(), model.n, model.a, model.c);
  }
  double to_dimensionless_time(double v) const {
    return dimensional_units ? dimensional().v_star / dimensional().r * v : v;
  }
  double to_hours(double v) const {
    return dimensional_units ? v : dimensional().r / dimensional().v_star * v;
  }
  double t_end_dimensionless() const { return to_dimensionless_time(t_end); }
  double t_end_hours() const { return to_hours(t_end); }
  std::vector<double> outputs_dimensionless() const {
    std::vector<double> o;
    for (double v : output_times) o.push_back(to_dimensionless_time(v));
    return o;
  }
  std::vector<double> outputs_hours() const {
    std::vector<double> o;
    for (double v : output_times) o.push_back(to_hours(v));
    return o;
  }

  // Initial density and speed as functions of x (dimensionless).
  Profile density_dimensionless() const {
    const Profile p = build_density();
    if (!dimensional_units) return p;
    const auto& d = dimensional();
    return Profile{[p, d](double x) { return p(d.r * x) / d.rho_bar; }, p.lo / d.r, p.hi / d.r,
                   scaled(p.breaks, 1.0 / d.r)};
  }
  Profile speed_dimensionless() const {
    const Profile p = build_speed();
    if (!dimensional_units) return p;
    const auto& d = dimensional();
    return everywhere([p, d](double x) { return p(d.r * x) / d.v_star - 1.0; }, scaled(p.breaks, 1.0 / d.r));
  }
  // Initial density (veh/km) and speed (km/h) as functions of xi (km).
  Profile density_dimensional() const {
    const Profile p = build_density();
    if (dimensional_units) return p;
    const auto& d = dimensional();
    return Profile{[p, d](double xi) { return d.rho_bar * p(xi / d.r); }, p.lo * d.r, p.hi * d.r,
                   scaled(p.breaks, d.r)};
  }
  Profile speed_dimensional() const {
    const Profile p = build_speed();
    if (dimensional_units) return p;
    const auto& d = dimensional();
    return everywhere([p, d](double xi) { return d.v_star * (1.0 + p(xi / d.r)); }, scaled(p.breaks, d.r));
  }

  double initial_mass_dimensionless() const { return density_dimensionless().mass(256); }

  void validate() const {
    model.validate();
    if (dim) dim->validate();
    if (dimensional_units && !dim) throw ConfigError("dimensional units need a 'dimensional' block");
    if (!(t_end > 0.0)) throw ConfigError("t_end must be > 0");
    for (double o : output_times) {
      if (!(o >= 0.0) || o > t_end) throw ConfigError("output times must lie in [0, t_end]");
    }
    if (nm2_n < 2) throw ConfigError("nm2.n must be >= 2");
    if (!(flow_threshold > 0.0)) throw ConfigError("analysis.flow_threshold must be > 0");
    if (!(flow_sample >= 0.0)) throw ConfigError("analysis.flow_sample must be >= 0");
    nm1.validate();
    reduced.validate();
    arz.validate();
    arz_grid.validate();
    particle.config(1.0);
    nm2.config(1.0);
    // initial data must be admissible
    const Profile rho = density_dimensionless();
    const Profile w = speed_dimensionless();
    if (!(rho.hi > rho.lo)) throw ConfigError("density support is empty");
    const Model m(model);
    const int samples = 2000;
    for (int k = 1; k < samples; ++k) {
      const double x = rho.lo + (rho.hi - rho.lo) * k / samples;
      const double r = rho(x);
      if (!(r >= 0.0) || !(r < model.R)) {
        std::ostringstream os;
        os << "initial density " << r << " at x = " << x << " outside [0, R)";
        throw ConfigError(os.str());
      }
      if (!m.speed_ok(w(x))) {
        std::ostringstream os;
        os << "initial speed w = " << w(x) << " at x = " << x << " outside (-1, b)";
        throw ConfigError(os.str());
      }
    }
  }

  json to_json() const;

 private:
  static std::vector<double> scaled(const std::vector<double>& v, double f) {
    std::vector<double> out;
    for (double x : v) out.push_back(x * f);
    return out;
  }
  // Speeds are needed on the closed support; defined on the whole line.
  static Profile everywhere(std::function<double(double)> f, std::vector<double> breaks) {
    const double inf = std::numeric_limits<double>::infinity();
    return Profile{std::move(f), -inf, inf, std::move(breaks)};
  }
  Profile build_density() const { return build_profile(density, "density", true); }
  Profile build_speed() const;
  Profile build_profile(const json& spec, const std::string& path, bool is_density) const;
};

// ---- profile specs ------------------------------------------------------

inline BeltShape read_belt(detail::Reader& r) {
  BeltShape b;
  b.lo = r.num("lo", b.lo);
  b.hi = r.num("hi", b.hi);
  b.ramp = r.num("ramp", b.ramp);
  b.belt_lo = r.num("belt_lo", b.belt_lo);
  b.belt_hi = r.num("belt_hi", b.belt_hi);
  b.belt_ramp = r.num("belt_ramp", b.belt_ramp);
  b.base = r.num("base", b.base);
  b.peak = r.num("peak", b.peak);
  b.validate();
  return b;
}

inline Profile Scenario::build_profile(const json& spec, const std::string& path,
                                       bool is_density) const {
  detail::Reader r(spec, path);
  const std::string kind = r.str("kind");
  Profile p;
  if (kind == "quartic_bump") {
    const double amp = r.num("amp"), lo = r.num("lo"), hi = r.num("hi");
    if (!(hi > lo)) throw ConfigError(path + ": need lo < hi");
    p = Profile::quartic_bump(amp, lo, hi);
  } else if (kind == "constant") {
    const double v = r.num("value"), lo = r.num("lo"), hi = r.num("hi");
    if (!(hi > lo)) throw ConfigError(path + ": need lo < hi");
    p = Profile::constant(v, lo, hi);
  } else if (kind == "table") {
    std::vector<double> xs, ys;
    if (r.has("file")) {
      std::filesystem::path f = r.str("file");
      if (f.is_relative()) f = base_dir / f;
      const CsvTable t = read_csv(f.string());
      if (t.header.size() != 2) throw ConfigError(path + ": table file needs two columns (x, value)");
      for (const auto& row : t.rows) {
        xs.push_back(parse_double(row[0]));
        ys.push_back(parse_double(row[1]));
      }
    } else {
      xs = r.nums("x");
      ys = r.nums("value");
    }
    p = Profile::table(std::move(xs), std::move(ys));
  } else if (kind == "belt") {
    const BeltShape b = read_belt(r);
    p = Profile{b, b.lo, b.hi, b.breaks()};
  } else if (kind == "arz_equilibrium" && !is_density) {
    if (!dimensional_units) throw ConfigError(path + ": arz_equilibrium needs dimensional units");
    const Profile rho = build_density();
    const ArzParams ap = arz;
    r.finish();
    const double inf = std::numeric_limits<double>::infinity();
    return Profile{[rho, ap](double xi) { return equilibrium_speed(rho(xi), ap); }, -inf, inf,
                   rho.breaks};
  } else {
    throw ConfigError(path + ".kind: unknown profile kind '" + kind + "'");
  }
  r.finish();
  return p;
}

// A speed profile is zero outside its own interval in dimensionless units
// (w = 0 is the set-point) and is the set-point speed in dimensional units.
inline Profile Scenario::build_speed() const {
  const Profile raw = build_profile(speed, "speed", false);
  if (std::isinf(raw.lo)) return raw;
  const double rest = dimensional_units ? dimensional().v_star : 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  return Profile{[raw, rest](double x) { return (x > raw.lo && x < raw.hi) ? raw(x) : rest; }, -inf,
                 inf, raw.breaks};
}

// ---- JSON round trip ----------------------------------------------------

inline json stepper_json(const StepperSettings& s) {
  return {{"atol", s.atol}, {"rtol", s.rtol}, {"p_factor", s.p_factor}, {"dt0", s.dt0},
          {"dt_min", s.dt_min}};
}

inline StepperSettings read_stepper(detail::Reader& r, StepperSettings s = {}) {
  s.atol = r.num("atol", s.atol);
  s.rtol = r.num("rtol", s.rtol);
  s.p_factor = r.num("p_factor", s.p_factor);
  s.dt0 = r.num("dt0", s.dt0);
  s.dt_min = r.num("dt_min", s.dt_min);
  return s;
}

inline json Scenario::to_json() const {
  json j;
  j["name"] = name;
  j["units"] = dimensional_units ? "dimensional" : "dimensionless";
  json m = {{"n", model.n}, {"a", model.a}, {"c", model.c}};
  if (model_has_speed_constants) {
    m["b"] = model.b;
    m["R"] = model.R;
    m["sigma"] = model.sigma;
  }
  j["model"] = m;
  if (dim) {
    j["dimensional"] = {{"v_star", dim->v_star},   {"r", dim->r},
                        {"rho_bar", dim->rho_bar}, {"rho_max", dim->rho_max},
                        {"v_max", dim->v_max},     {"sigma_tilde", dim->sigma_tilde}};
  }
  j["density"] = density;
  j["speed"] = speed;
  j["t_end"] = t_end;
  j["output_times"] = output_times;
  j["particle"] = stepper_json(particle);
  j["nm1"] = {{"dt", nm1.dt}, {"dx", nm1.dx}, {"pad", nm1.pad}};
  json n2 = stepper_json(nm2);
  n2["n"] = nm2_n;
  j["nm2"] = n2;
  j["reduced"] = {{"dt", reduced.dt},
                  {"dx", reduced.dx},
                  {"pad", reduced.pad},
                  {"growth_limit", reduced.growth_limit}};
  j["arz"] = {{"v_f", arz.v_f},
              {"rho_c", arz.rho_c},
              {"d", arz.d},
              {"delta_seconds", arz.delta * 3600.0},
              {"rho_max", arz.rho_max},
              {"dxi", arz_grid.dxi},
              {"dtau", arz_grid.dtau},
              {"vacuum_rho", arz_grid.vacuum_rho},
              {"flush_rho", arz_grid.flush_rho}};
  j["analysis"] = {{"flow_threshold", flow_threshold}, {"flow_sample", flow_sample}};
  return j;
}

inline Scenario scenario_from_json(const json& doc, const std::filesystem::path& base_dir = {}) {
  detail::Reader top(doc, "");
  Scenario s;
  s.base_dir = base_dir;
  s.name = top.str("name");
  const std::string units = top.str("units", "dimensionless");
  if (units != "dimensionless" && units != "dimensional") {
    throw ConfigError("units: expected 'dimensionless' or 'dimensional', got '" + units + "'");
  }
  s.dimensional_units = units == "dimensional";

  if (top.has("dimensional")) {
    detail::Reader r(top.sub("dimensional"), "dimensional");
    DimensionalParams d;
    d.v_star = r.num("v_star");
    d.r = r.num("r");
    d.rho_bar = r.num("rho_bar");
    d.rho_max = r.num("rho_max");
    d.v_max = r.num("v_max");
    d.sigma_tilde = r.num("sigma_tilde");
    r.finish();
    d.validate();
    s.dim = d;
  } else {
    top.allow("dimensional");
  }

  {
    detail::Reader r(top.sub("model"), "model");
    s.model.n = r.count("n", s.model.n);
    s.model.a = r.num("a");
    s.model.c = r.num("c", 1.0);
    const bool any = r.has("b") || r.has("R") || r.has("sigma");
    s.model_has_speed_constants = any;
    if (any) {
      s.model.b = r.num("b");
      s.model.R = r.num("R");
      s.model.sigma = r.num("sigma");
    } else {
      if (!s.dim) throw ConfigError("model.b, model.R, model.sigma are required without 'dimensional'");
      s.model.b = s.dim->b();
      s.model.R = s.dim->R();
      s.model.sigma = s.dim->sigma();
    }
    r.finish();
  }

  if (top.has("arz")) {
    detail::Reader r(top.sub("arz"), "arz");
    s.arz.v_f = r.num("v_f", s.arz.v_f);
    s.arz.rho_c = r.num("rho_c", s.arz.rho_c);
    s.arz.d = r.num("d", s.arz.d);
    s.arz.delta = r.num("delta_seconds", s.arz.delta * 3600.0) / 3600.0;
    s.arz.rho_max = r.num("rho_max", s.arz.rho_max);
    s.arz_grid.dxi = r.num("dxi", s.arz_grid.dxi);
    s.arz_grid.dtau = r.num("dtau", s.arz_grid.dtau);
    s.arz_grid.vacuum_rho = r.num("vacuum_rho", s.arz_grid.vacuum_rho);
    s.arz_grid.flush_rho = r.num("flush_rho", s.arz_grid.flush_rho);
    r.finish();
  } else {
    top.allow("arz");
  }

  s.density = top.sub("density");
  s.speed = top.sub("speed");

  s.t_end = top.num("t_end");
  if (top.has("output_times")) s.output_times = top.nums("output_times");
  else top.allow("output_times");

  if (top.has("particle")) {
    detail::Reader r(top.sub("particle"), "particle");
    s.particle = read_stepper(r);
    r.finish();
  } else {
    top.allow("particle");
  }
  if (top.has("nm1")) {
    detail::Reader r(top.sub("nm1"), "nm1");
    s.nm1.dt = r.num("dt", s.nm1.dt);
    s.nm1.dx = r.num("dx", s.nm1.dx);
    s.nm1.pad = r.count("pad", s.nm1.pad);
    r.finish();
  } else {
    top.allow("nm1");
  }
  if (top.has("nm2")) {
    detail::Reader r(top.sub("nm2"), "nm2");
    s.nm2 = read_stepper(r);
    s.nm2_n = r.count("n", s.nm2_n);
    r.finish();
  } else {
    top.allow("nm2");
  }
  if (top.has("reduced")) {
    detail::Reader r(top.sub("reduced"), "reduced");
    s.reduced.dt = r.num("dt", s.reduced.dt);
    s.reduced.dx = r.num("dx", s.reduced.dx);
    s.reduced.pad = r.count("pad", s.reduced.pad);
    s.reduced.growth_limit = r.num("growth_limit", s.reduced.growth_limit);
    r.finish();
  } else {
    top.allow("reduced");
  }
  if (top.has("analysis")) {
    detail::Reader r(top.sub("analysis"), "analysis");
    s.flow_threshold = r.num("flow_threshold", s.flow_threshold);
    s.flow_sample = r.num("flow_sample", s.flow_sample);
    r.finish();
  } else {
    top.allow("analysis");
  }
  top.finish();
  s.validate();
  return s;
}

// Applies "a.b.c=value" to a document. The value is parsed as JSON when it
// parses, as a string otherwise. Creating new keys is allowed here; the
// scenario reader rejects them if they are unknown.
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty key");
    if (!node->is_object()) throw ConfigError("override '" + path + "': parent is not an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario file " + path.string() + ": " + e.what());
  }
}

inline Scenario load_scenario(const std::filesystem::path& path,
                              const std::vector<std::string>& overrides = {}) {
  json doc = read_json_file(path);
  for (const auto& o : overrides) apply_override(doc, o);
  return scenario_from_json(doc, path.parent_path());
}

// ---- built-in scenarios -------------------------------------------------

// Academic example: quartic density bump on (-0.52, 2.52), negative speed
// bump on (0.5, 1.5), Table-style particle/NM1/NM2 numerics.
inline Scenario academic_example() {
  Scenario s;
  s.name = "academic";
  s.dimensional_units = false;
  s.model = ModelParams{};  // n 225, a 0.4653, b 0.0606, R 1.9, sigma 30, c 1
  s.model_has_speed_constants = true;
  s.dim = DimensionalParams{};  // v* 33, r 1, rho_bar 63.1579, rho_max 120, v_max 35, sigma~ 990
  s.density = {{"kind", "quartic_bump"}, {"amp", 0.25}, {"lo", -0.52}, {"hi", 2.52}};
  s.speed = {{"kind", "quartic_bump"}, {"amp", -0.158}, {"lo", 0.5}, {"hi", 1.5}};
  s.t_end = 33.0;
  s.output_times = {0, 1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 25, 30, 33};
  s.nm2_n = 225;
  s.validate();
  return s;
}

// Traffic scenario: congestion belt on [1.5, 2.75] km inside [0, 4] km,
// equilibrium initial speeds, AV constants v* = 102 km/h, rho_bar = 31,
// sigma~ = 3060, c = 40; ARZ with delta = 20 s. The belt height is set so
// the density carries the particle mass 31 (n-1)/(n a) of n = 4500, a = 0.2411.
inline Scenario traffic_scenario() {
  Scenario s;
  s.name = "traffic";
  s.dimensional_units = true;
  DimensionalParams d;
  d.v_star = 102.0;
  d.r = 1.0;
  d.rho_bar = 31.0;
  d.rho_max = 180.0;
  d.v_max = 130.0;
  d.sigma_tilde = 3060.0;
  s.dim = d;
  s.model.n = 4500;
  s.model.a = 0.2411;
  s.model.c = 40.0;
  s.model.b = d.b();
  s.model.R = d.R();
  s.model.sigma = d.sigma();
  s.model_has_speed_constants = false;
  BeltShape belt;
  const double mass = d.rho_bar * d.r * static_cast<double>(s.model.n - 1) /
                      (static_cast<double>(s.model.n) * s.model.a);
  belt.peak = belt.peak_for_mass(mass);
  s.density = {{"kind", "belt"},           {"lo", belt.lo},         {"hi", belt.hi},
               {"ramp", belt.ramp},        {"belt_lo", belt.belt_lo}, {"belt_hi", belt.belt_hi},
               {"belt_ramp", belt.belt_ramp}, {"base", belt.base},  {"peak", belt.peak}};
  s.speed = {{"kind", "arz_equilibrium"}};
  s.t_end = 1.0;
  s.output_times = {0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0};
  s.particle.atol = 1e-5;
  s.particle.rtol = 1e-5;
  s.particle.dt0 = 1e-6;
  s.nm2_n = 4500;
  s.nm2.atol = 1e-5;
  s.nm2.rtol = 1e-5;
  s.nm2.dt0 = 1e-8;
  s.nm2.dt_min = 1e-16;
  s.nm1.dt = 1e-4;
  s.nm1.dx = 0.01;
  s.reduced.dt = 1e-4;
  s.reduced.dx = 0.01;
  s.arz_grid.dxi = 0.04;
  s.arz_grid.dtau = 1e-6;
  s.flow_sample = 0.005;
  s.validate();
  return s;
}

// Keeps the particle mass (n-1)/(n a) of `p` while changing n.
inline ModelParams rescaled(const ModelParams& p, std::size_t n) {
  if (n < 3) throw ConfigError("rescaled: n must be >= 3");
  const double m = static_cast<double>(p.n - 1) / (static_cast<double>(p.n) * p.a);
  ModelParams q = p;
  q.n = n;
  q.a = static_cast<double>(n - 1) / (static_cast<double>(n) * m);
  return q;
}

// Same scenario with a different set-point v*. b and sigma follow from the
// dimensional constants; sigma~, v_max and the initial data stay fixed.
inline Scenario with_v_star(Scenario sc, double v_star) {
  if (!sc.dim) throw ConfigError("with_v_star needs a dimensional block");
  DimensionalParams d = *sc.dim;
  d.v_star = v_star;
  d.validate();
  sc.dim = d;
  sc.model.b = d.b();
  sc.model.R = d.R();
  sc.model.sigma = d.sigma();
  sc.model_has_speed_constants = false;
  sc.validate();
  return sc;
}

// ---- particle placement --------------------------------------------------

struct Placement {
  ParticleState state;
  double particle_mass = 0.0;  // (n-1)/(na)
  double profile_mass = 0.0;   // int rho0
  double mismatch() const { return std::abs(particle_mass - profile_mass) / profile_mass; }
};

// x_1 = L(0), x_n = l(0); each of the n-1 gaps holds 1/(n-1) of the profile
// mass; w_i = w0(x_i).
inline Placement place_particles(const Profile& rho0, const Profile& w0, const ModelParams& p) {
  p.validate();
  const CumulativeMass cm(rho0);
  const std::size_t n = p.n;
  Placement out;
  out.profile_mass = cm.total();
  out.particle_mass = static_cast<double>(n - 1) / (static_cast<double>(n) * p.a);
  auto& s = out.state;
  s.x.resize(n);
  s.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = static_cast<double>(n - 1 - i) / static_cast<double>(n - 1);
    s.x[i] = i == 0 ? rho0.hi : (i + 1 == n ? rho0.lo : cm.inverse(frac * cm.total()));
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(s.x[i] < s.x[i - 1])) {
      throw ConfigError("place_particles: n = " + std::to_string(n) +
                        " exceeds the resolvable mass quantization");
    }
  }
  for (std::size_t i = 0; i < n; ++i) s.w[i] = w0(s.x[i]);
  return out;
}

inline Placement place_particles(const Scenario& sc, const ModelParams& p) {
  return place_particles(sc.density_dimensionless(), sc.speed_dimensionless(), p);
}

}  // namespace avflow
