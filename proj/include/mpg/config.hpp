#pragma once

// JSON run configuration. Every key is read through a Section, which records
// the resolved value (defaults included) and reports unknown keys, so one
// pass yields both the provenance copy and the full list of problems.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpg/constitutive.hpp"
#include "mpg/errors.hpp"
#include "mpg/evolution.hpp"
#include "mpg/geometry.hpp"
#include "mpg/kinetics.hpp"
#include "mpg/stationary.hpp"

namespace mpg {

using Json = nlohmann::ordered_json;

class Section {
 public:
  Section(const Json& in, std::string path, std::vector<std::string>& issues)
      : in_(in), path_(std::move(path)), issues_(&issues) {
    if (!in_.is_object()) {
      issue("must be an object");
      in_ = Json::object();
    }
  }

  bool has(const std::string& key) const { return in_.contains(key); }

  double number(const std::string& key, std::optional<double> fallback, double lo = -HUGE_VAL, double hi = HUGE_VAL,
                bool open_lo = false) {
    used_.insert(key);
    double v = fallback.value_or(0.0);
    if (!in_.contains(key)) {
      if (!fallback) issue(key + " is required");
    } else if (!in_[key].is_number()) {
      issue(key + " must be a number");
    } else {
      v = in_[key].get<double>();
      const bool low = open_lo ? !(v > lo) : !(v >= lo);
      if (low || !(v <= hi)) issue(key + " = " + fmt(v) + " outside " + (open_lo ? "(" : "[") + fmt(lo) + ", " + fmt(hi) + "]");
    }
    out_[key] = v;
    return v;
  }

  double positive(const std::string& key, std::optional<double> fallback) { return number(key, fallback, 0.0, HUGE_VAL, true); }

  int integer(const std::string& key, std::optional<int> fallback, int lo, int hi = 1 << 30,
              const std::string& why = "") {
    used_.insert(key);
    int v = fallback.value_or(0);
    if (!in_.contains(key)) {
      if (!fallback) issue(key + " is required");
    } else if (!in_[key].is_number_integer()) {
      issue(key + " must be an integer");
    } else {
      const auto raw = in_[key].get<std::int64_t>();
      if (raw < lo || raw > hi) {
        issue(key + " = " + std::to_string(raw) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]" +
              (why.empty() ? "" : " (" + why + ")"));
      } else {
        v = static_cast<int>(raw);
      }
    }
    out_[key] = v;
    return v;
  }

  bool boolean(const std::string& key, bool fallback) {
    used_.insert(key);
    bool v = fallback;
    if (in_.contains(key)) {
      if (in_[key].is_boolean()) v = in_[key].get<bool>();
      else issue(key + " must be true or false");
    }
    out_[key] = v;
    return v;
  }

  std::string choice(const std::string& key, std::optional<std::string> fallback, const std::vector<std::string>& allowed) {
    used_.insert(key);
    std::string v = fallback.value_or("");
    if (!in_.contains(key)) {
      if (!fallback) issue(key + " is required");
    } else if (!in_[key].is_string()) {
      issue(key + " must be a string");
    } else {
      v = in_[key].get<std::string>();
      if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        issue(key + " = \"" + v + "\" is not one of {" + list + "}");
        v = fallback.value_or(allowed.front());
      }
    }
    out_[key] = v;
    return v;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    std::string v = fallback;
    if (in_.contains(key)) {
      if (in_[key].is_string()) v = in_[key].get<std::string>();
      else issue(key + " must be a string");
    }
    out_[key] = v;
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback) {
    used_.insert(key);
    std::vector<double> v = fallback.value_or(std::vector<double>{});
    if (!in_.contains(key)) {
      if (!fallback) issue(key + " is required");
    } else if (!in_[key].is_array()) {
      issue(key + " must be an array of numbers");
    } else {
      v.clear();
      for (const auto& e : in_[key]) {
        if (!e.is_number()) {
          issue(key + " must contain only numbers");
          break;
        }
        v.push_back(e.get<double>());
      }
    }
    out_[key] = v;
    return v;
  }

  /// Nested section; a missing key reads as an empty object.
  Section child(const std::string& key) {
    used_.insert(key);
    return Section(in_.contains(key) ? in_[key] : Json::object(), path_ + "." + key, *issues_);
  }

  std::vector<Section> children(const std::string& key) {
    used_.insert(key);
    std::vector<Section> out;
    if (!in_.contains(key)) return out;
    if (!in_[key].is_array()) {
      issue(key + " must be an array");
      return out;
    }
    for (std::size_t k = 0; k < in_[key].size(); ++k)
      out.emplace_back(in_[key][k], path_ + "." + key + "[" + std::to_string(k) + "]", *issues_);
    return out;
  }

  void adopt(const std::string& key, Section& c) {
    c.finish();
    out_[key] = c.resolved();
  }

  void adopt(const std::string& key, std::vector<Section>& cs) {
    Json arr = Json::array();
    for (auto& c : cs) {
      c.finish();
      arr.push_back(c.resolved());
    }
    out_[key] = arr;
  }

  /// Reports keys that were never read.
  void finish() {
    for (const auto& [k, _] : in_.items())
      if (!used_.count(k)) issue("unknown key \"" + k + "\"");
  }

  void issue(const std::string& msg) const { issues_->push_back(path_ + ": " + msg); }
  const Json& resolved() const { return out_; }
  const std::string& path() const { return path_; }

  static std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
  }

 private:
  Json in_;
  Json out_ = Json::object();
  std::string path_;
  std::vector<std::string>* issues_;
  std::set<std::string> used_;
};

// ---------------------------------------------------------------------------

enum class Mode { Evolve, Stationary, Dependence, Selftest, Dump };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Evolve: return "evolve";
    case Mode::Stationary: return "stationary";
    case Mode::Dependence: return "dependence";
    case Mode::Selftest: return "selftest";
    default: return "dump";
  }
}

struct InitialData {
  std::string type = "random";  ///< random | constant
  double phi = 0.5, c = 1.0;
  bool smooth = true;
  std::uint64_t seed = 0;
};

struct RunConfig {
  Mode mode = Mode::Evolve;
  StressLaw law = PowerAdhesive(1.0, 0.5);
  GrowthPreset tumor_growth = Factored{}, host_growth = Factored{};
  AbsorptionPreset tumor_uptake = LinearUptake{0.0}, host_uptake = LinearUptake{0.0};
  double delta = 0.1, phi_max = 1.0, c_star = 0.0;
  int n_cells = 64;
  BoundaryRole left = Vascular{1.0, 1.0}, right = Far{0.5, 1.0};
  InterfaceTrajectory traj = InterfaceTrajectory::constant(0.5);
  double kappa_m = 1.0, D = 1.0;
  InitialData initial;
  double dt = 1e-3, t_max = 0.1, tol = 1e-10;
  int max_picard = 50, max_newton = 50, k_max = 500, lipschitz_resolution = 401;
  double omega = 1.0, eps_pos = 0.1;
  std::string out_dir = "out";
  int snapshot_every = 10;
  std::vector<double> epsilons{1e-1, 1e-2, 1e-3, 1e-4};
  std::string dump_target = "constitutive";
  int dump_samples = 101;
  Json resolved;  ///< full configuration with defaults filled in
};

namespace detail {

using FnRegistry = std::map<std::string, ScalarFn>;

/// Named factors for the explicit `factored` preset.
inline FnRegistry phi_factors(double phi_max) {
  return {{"logistic", clamped([](double p) { return p * (1.0 - p); }, 0.0, phi_max)},
          {"linear", clamped([](double p) { return p; }, 0.0, phi_max)},
          {"vacancy", clamped([phi_max](double p) { return phi_max - p; }, 0.0, phi_max)},
          {"one", [](double) { return 1.0; }}};
}

inline FnRegistry c_factors(double c_star) {
  return {{"identity", [](double c) { return positive_part(c); }},
          {"excess", [c_star](double c) { return positive_part(c - c_star); }},
          {"deficit", [c_star](double c) { return negative_part(c - c_star); }},
          {"one", [](double) { return 1.0; }}};
}

inline std::vector<std::string> keys_of(const FnRegistry& r) {
  std::vector<std::string> k;
  for (const auto& [name, _] : r) k.push_back(name);
  return k;
}

inline StressLaw read_law(Section& s) {
  const auto law = s.choice("law", "power_adhesive",
                            {"polynomial_overshoot", "saturating_hump", "power_adhesive", "asymptotic_blowup"});
  try {
    if (law == "polynomial_overshoot") {
      return PolynomialOvershoot(s.number("a", 1.0), s.number("b", 1.0), s.integer("n", 2, 1),
                                 s.number("phi_star", 0.5));
    }
    if (law == "saturating_hump") return SaturatingHump(s.number("tau", 1.0), s.number("lambda", 1.0));
    if (law == "asymptotic_blowup") {
      return AsymptoticBlowup(s.number("p", 1.0), s.number("phi_star", 0.5), s.number("phi_max", 1.0));
    }
    return PowerAdhesive(s.number("n", 1.0), s.number("phi_star", 0.5));
  } catch (const ConstructionError& e) {
    s.issue(e.what());
    return PowerAdhesive(1.0, 0.5);
  }
}

inline GrowthPreset read_growth(Section& s, double phi_max, double c_star) {
  const auto preset = s.choice("preset", "factored",
                               {"breward_mm", "threshold_logistic", "corrected_threshold", "energy_atp",
                                "stress_induced", "factored"});
  if (preset == "breward_mm") {
    return BrewardMM{s.number("s0", 1.0), s.number("s1", 0.0, 0.0), s.number("s2", 0.0, 0.0), s.number("s3", 0.0, 0.0),
                     s.number("s4", 0.0, 0.0)};
  }
  if (preset == "threshold_logistic") return ThresholdLogistic{s.number("gamma", 1.0), s.number("c_star", c_star)};
  if (preset == "corrected_threshold") {
    return CorrectedThreshold{s.number("gamma1", 1.0), s.number("gamma2", 1.0), s.number("c_star", c_star)};
  }
  if (preset == "energy_atp") {
    return EnergyATP{s.positive("k", 1.0), s.positive("theta_hat", 1.0), s.positive("q0_m", 1.0),
                     s.positive("tau_half", 1.0), {}, {}};
  }
  if (preset == "stress_induced") {
    StressInduced si{s.number("gamma", 1.0), s.number("delta_alpha", 0.0), s.number("sigma_star", 0.0),
                     s.number("sigma_star2", 1.0), s.positive("c_star", c_star > 0 ? c_star : 1.0), std::nullopt};
    if (s.has("width")) si.width = s.positive("width", 1e-2);
    return si;
  }
  Factored f;
  const auto phi_fns = phi_factors(phi_max);
  auto terms = s.children("terms");
  for (auto& t : terms) {
    const auto id = t.text("id", "term" + std::to_string(f.terms.size()));
    const double rate = t.number("rate", std::nullopt);
    const bool prolif = t.boolean("proliferation", rate >= 0.0);
    const double cs = t.number("c_star", c_star);
    const auto c_fns = c_factors(cs);
    const auto fname = t.choice("f", "linear", keys_of(phi_fns));
    const auto gname = t.choice("g", "one", keys_of(c_fns));
    f.terms.push_back({id, rate, phi_fns.at(fname), c_fns.at(gname), prolif});
  }
  s.adopt("terms", terms);
  return f;
}

inline AbsorptionPreset read_uptake(Section& s) {
  const auto preset = s.choice("preset", "linear", {"linear", "michaelis_menten", "energy"});
  const double lambda = s.number("lambda", 1.0, 0.0);
  if (preset == "michaelis_menten") return MichaelisMentenUptake{lambda, s.positive("k_half", 1.0)};
  if (preset == "energy") return EnergyUptake{lambda};
  return LinearUptake{lambda};
}

inline BoundaryRole read_role(Section& s, const std::string& fallback) {
  const auto type = s.choice("type", fallback, {"vascular", "far"});
  if (type == "far") return Far{s.number("phi_star", 0.5, 0.0, 1.0, true), s.positive("c_b", 1.0)};
  return Vascular{s.number("eta", 1.0, 0.0), s.positive("c_b", 1.0)};
}

inline InterfaceTrajectory read_interface(Section& s) {
  const auto type = s.choice("type", "constant", {"constant", "static", "table"});
  const double left = s.number("tumor_left", 0.0, 0.0, 1.0);
  try {
    if (type == "table") return InterfaceTrajectory::table(s.numbers("times", std::nullopt), s.numbers("positions", std::nullopt), left);
    return InterfaceTrajectory::constant(s.number("s", 0.5, 0.0, 1.0), left);
  } catch (const ConfigError& e) {
    s.issue(e.what());
    return InterfaceTrajectory::constant(0.5);
  }
}

}  // namespace detail

/// Builds a RunConfig from parsed JSON. Throws ValidationError listing every problem.
inline RunConfig config_from_json(const Json& root) {
  std::vector<std::string> issues;
  RunConfig cfg;
  Section top(root, "config", issues);
  const auto mode = top.choice("mode", "evolve", {"evolve", "stationary", "dependence", "selftest", "dump"});
  for (Mode m : {Mode::Evolve, Mode::Stationary, Mode::Dependence, Mode::Selftest, Mode::Dump})
    if (mode == mode_name(m)) cfg.mode = m;

  auto cons = top.child("constitutive");
  cfg.law = detail::read_law(cons);
  top.adopt("constitutive", cons);

  auto kin = top.child("kinetics");
  cfg.delta = kin.number("delta", 0.1);
  cfg.phi_max = kin.number("phi_max", 1.0, 0.0, 1.0, true);
  cfg.c_star = kin.number("c_star", 0.0, 0.0);
  for (const char* pop : {"tumor", "host"}) {
    const bool tumor = std::string(pop) == "tumor";
    if (!tumor && !kin.has("host")) continue;
    auto ps = kin.child(pop);
    auto gs = ps.child("growth");
    auto us = ps.child("uptake");
    (tumor ? cfg.tumor_growth : cfg.host_growth) = detail::read_growth(gs, cfg.phi_max, cfg.c_star);
    (tumor ? cfg.tumor_uptake : cfg.host_uptake) = detail::read_uptake(us);
    ps.adopt("growth", gs);
    ps.adopt("uptake", us);
    kin.adopt(pop, ps);
  }
  if (!kin.has("host")) {
    cfg.host_growth = cfg.tumor_growth;
    cfg.host_uptake = cfg.tumor_uptake;
  }
  top.adopt("kinetics", kin);

  auto geo = top.child("geometry");
  cfg.n_cells = geo.integer("n_cells", 64, 4, 1 << 20, "the grid needs at least 4 cells");
  auto ls = geo.child("left");
  auto rs = geo.child("right");
  cfg.left = detail::read_role(ls, "vascular");
  cfg.right = detail::read_role(rs, "far");
  geo.adopt("left", ls);
  geo.adopt("right", rs);
  auto is = geo.child("interface");
  cfg.traj = detail::read_interface(is);
  geo.adopt("interface", is);
  top.adopt("geometry", geo);

  auto tr = top.child("transport");
  cfg.kappa_m = tr.positive("kappa_m", 1.0);
  cfg.D = tr.positive("D", 1.0);
  top.adopt("transport", tr);

  auto ini = top.child("initial");
  cfg.initial.type = ini.choice("type", "random", {"random", "constant"});
  if (cfg.initial.type == "constant") {
    cfg.initial.phi = ini.number("phi", 0.5);
    cfg.initial.c = ini.number("c", 1.0);
  } else {
    cfg.initial.smooth = ini.boolean("smooth", true);
    cfg.initial.seed = static_cast<std::uint64_t>(ini.integer("seed", 0, 0));
  }
  top.adopt("initial", ini);

  auto sol = top.child("solver");
  cfg.dt = sol.positive("dt", 1e-3);
  cfg.t_max = sol.positive("t_max", 0.1);
  cfg.tol = sol.positive("tol", 1e-10);
  cfg.max_picard = sol.integer("max_picard", 50, 1);
  cfg.max_newton = sol.integer("max_newton", 50, 1);
  cfg.k_max = sol.integer("k_max", 500, 1);
  cfg.omega = sol.number("omega", 1.0, 0.0, 1.0, true);
  cfg.eps_pos = sol.positive("eps_pos", 0.1);
  cfg.lipschitz_resolution = sol.integer("lipschitz_resolution", 401, 5);
  top.adopt("solver", sol);

  auto out = top.child("output");
  cfg.out_dir = out.text("dir", "out");
  cfg.snapshot_every = out.integer("snapshot_every", 10, 0);
  top.adopt("output", out);

  auto dep = top.child("dependence");
  cfg.epsilons = dep.numbers("epsilons", cfg.epsilons);
  for (double e : cfg.epsilons)
    if (!(e > 0.0)) dep.issue("epsilons must be positive");
  top.adopt("dependence", dep);

  auto dump = top.child("dump");
  cfg.dump_target = dump.choice("target", "constitutive", {"constitutive", "kinetics"});
  cfg.dump_samples = dump.integer("samples", 101, 2, 100000);
  top.adopt("dump", dump);

  top.finish();
  cfg.resolved = top.resolved();

  // Cross-field checks reuse the library validators.
  if (issues.empty() && cfg.mode != Mode::Selftest) {
    try {
      const Grid1D grid = build_grid(cfg.n_cells, cfg.left, cfg.right);
      const ConstitutivePair pair = build_pair(cfg.law);
      const KineticsSpec spec = build_kinetics(cfg.tumor_growth, cfg.tumor_uptake, cfg.delta, cfg.phi_max,
                                               max_c_b(grid), cfg.c_star, &pair, &cfg.host_growth, &cfg.host_uptake);
      for (const auto& f : validate_hypotheses(spec, pair).failures()) issues.push_back("kinetics: " + f.id + ": " + f.witness);
      if (const double ps = far_phi_star(grid); std::isfinite(ps)) {
        if (ps > cfg.phi_max) issues.push_back("geometry: phi_star exceeds phi_max");
        if (!pair.in_domain(ps)) issues.push_back("geometry: phi_star outside the domain of Phi");
        if (cfg.mode == Mode::Stationary && !(cfg.eps_pos < ps)) issues.push_back("solver: eps_pos must be below phi_star");
      } else if (cfg.mode == Mode::Stationary) {
        issues.push_back("geometry: the stationary problem needs a far boundary");
      }
      if (cfg.initial.type == "constant") {
        if (!(cfg.initial.phi >= 0.0 && cfg.initial.phi <= cfg.phi_max)) issues.push_back("initial: (H8) phi outside [0, phi_max]");
        if (!(cfg.initial.c >= 0.0 && cfg.initial.c <= max_c_b(grid))) issues.push_back("initial: (H8) c outside [0, c_b]");
      }
    } catch (const Error& e) {
      issues.push_back(std::string(e.kind()) + ": " + e.what());
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return cfg;
}

/// Parses JSON text; syntax errors become ParseError with line and column.
inline Json parse_config_text(const std::string& text, const std::string& source = "<config>") {
  try {
    return Json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(parse_config_text(ss.str(), path));
}

// ---------------------------------------------------------------------------
// Problem assembly

inline Grid1D config_grid(const RunConfig& cfg) { return build_grid(cfg.n_cells, cfg.left, cfg.right); }

inline KineticsSpec config_kinetics(const RunConfig& cfg, const Grid1D& grid, const ConstitutivePair& pair) {
  return build_kinetics(cfg.tumor_growth, cfg.tumor_uptake, cfg.delta, cfg.phi_max, max_c_b(grid), cfg.c_star, &pair,
                        &cfg.host_growth, &cfg.host_uptake);
}

inline EvolutionProblem evolution_problem(const RunConfig& cfg) {
  EvolutionProblem p;
  p.grid = config_grid(cfg);
  p.pair = build_pair(cfg.law);
  p.spec = config_kinetics(cfg, p.grid, p.pair);
  p.traj = cfg.traj;
  p.kappa_m = cfg.kappa_m;
  p.D = cfg.D;
  p.t_max = cfg.t_max;
  p.dt = cfg.dt;
  p.solver.tol = cfg.tol;
  p.solver.max_picard = cfg.max_picard;
  p.solver.max_newton = cfg.max_newton;
  p.snapshot_every = cfg.snapshot_every;
  if (cfg.initial.type == "constant") {
    p.phi0.assign(p.grid.nodes(), cfg.initial.phi);
    p.c0.assign(p.grid.nodes(), cfg.initial.c);
    for (std::size_t e = 0; e < 2; ++e) {
      if (const auto* f = std::get_if<Far>(&p.grid.role(e))) {
        p.phi0[p.grid.boundary_node(e)] = f->phi_star;
        p.c0[p.grid.boundary_node(e)] = f->c_b;
      }
    }
  } else {
    const double cap = p.pair.domain_upper() ? 0.95 * std::min(1.0, *p.pair.domain_upper() / cfg.phi_max) : 1.0;
    const auto init = random_initial_data(p.grid, cfg.phi_max, cfg.initial.seed, cfg.initial.smooth, cap);
    p.phi0 = init.phi;
    p.c0 = init.c;
  }
  return p;
}

inline StationaryProblem stationary_problem(const RunConfig& cfg) {
  StationaryProblem p;
  p.grid = config_grid(cfg);
  p.pair = build_pair(cfg.law);
  p.spec = config_kinetics(cfg, p.grid, p.pair);
  p.kappa_m = cfg.kappa_m;
  p.D = cfg.D;
  p.S = cfg.traj.s_at(0.0);
  p.S_left = cfg.traj.tumor_left();
  p.eps_pos = cfg.eps_pos;
  p.tol = cfg.tol;
  p.k_max = cfg.k_max;
  p.omega = cfg.omega;
  p.lipschitz_resolution = cfg.lipschitz_resolution;
  return p;
}

}  // namespace mpg
