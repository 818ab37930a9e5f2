#pragma once

// Runs a configured mode and persists its artifacts. Every numeric field is
// written with %.17g and nothing time- or host-dependent enters the files, so
// equal configs give byte-identical outputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "mpg/analysis.hpp"
#include "mpg/config.hpp"
#include "mpg/evolution.hpp"
#include "mpg/poisson.hpp"
#include "mpg/stationary.hpp"

namespace mpg {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Distinct process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitInternal = 4 };

inline int exit_code_for(const Error& e) {
  if (dynamic_cast<const SolveError*>(&e) || dynamic_cast<const NewtonDivergence*>(&e) ||
      dynamic_cast<const NonfiniteField*>(&e) || dynamic_cast<const DegenerateError*>(&e) ||
      dynamic_cast<const InsufficientData*>(&e))
    return kExitSolver;
  return kExitConfig;
}

/// Machine-readable error record.
inline Json error_json(const std::string& kind, const std::string& message, int code,
                       const std::vector<std::string>& issues = {}) {
  Json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  if (!issues.empty()) j["error"]["issues"] = issues;
  j["exit_code"] = code;
  return j;
}

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  void text(const std::string& name, const std::string& body) const {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path(name).string());
    out << body;
  }

  void json(const std::string& name, const Json& j) const { text(name, j.dump(2) + "\n"); }

  /// Provenance record written next to every output.
  void metadata(const RunConfig& cfg, const std::vector<std::string>& files) const {
    Json m;
    m["program"] = "mpgrowth";
    m["mode"] = mode_name(cfg.mode);
    m["files"] = files;
    m["config"] = cfg.resolved;
    json("metadata.json", m);
  }

 private:
  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// evolve

inline Json audit_json(const Trajectory& tr) {
  Json a = Json::array();
  for (const auto& r : tr.audit) {
    Json j;
    j["step"] = r.step;
    j["t"] = r.t;
    j["dt"] = r.dt;
    j["phi_min"] = r.phi_min;
    j["phi_max"] = r.phi_max;
    j["c_min"] = r.c_min;
    j["c_max"] = r.c_max;
    j["residual"] = r.residual;
    j["newton_iterations"] = r.newton_iterations;
    j["picard_sweeps"] = r.picard_sweeps;
    j["substeps"] = r.substeps;
    a.push_back(j);
  }
  return a;
}

inline std::string snapshots_csv(const Grid1D& grid, const Trajectory& tr) {
  std::string s = "t,x,phi,c\n";
  for (const auto& snap : tr.snapshots)
    for (std::size_t i = 0; i < grid.nodes(); ++i)
      s += num(snap.t) + "," + num(grid.x(i)) + "," + num(snap.phi[i]) + "," + num(snap.c[i]) + "\n";
  return s;
}

inline Json run_evolve(const RunConfig& cfg, const ArtifactWriter& w) {
  const EvolutionProblem p = evolution_problem(cfg);
  const Trajectory tr = run(p);
  w.text("snapshots.csv", snapshots_csv(p.grid, tr));
  Json audit;
  audit["steps"] = static_cast<int>(tr.audit.size());
  audit["max_bound_violation"] = max_bound_violation(tr, p.spec.phi_max, max_c_b(p.grid));
  audit["records"] = audit_json(tr);
  w.json("audit.json", audit);
  w.text("plot.gp",
         "set datafile separator ','\n"
         "set key autotitle columnhead\n"
         "set xlabel 'x'\n"
         "set multiplot layout 2,1\n"
         "set ylabel 'phi'\n"
         "plot 'snapshots.csv' using 2:3:1 with lines palette notitle\n"
         "set ylabel 'c'\n"
         "plot 'snapshots.csv' using 2:4:1 with lines palette notitle\n"
         "unset multiplot\n");
  w.metadata(cfg, {"snapshots.csv", "audit.json", "plot.gp"});
  Json summary;
  summary["mode"] = "evolve";
  summary["steps"] = audit["steps"];
  summary["snapshots"] = static_cast<int>(tr.snapshots.size());
  summary["max_bound_violation"] = audit["max_bound_violation"];
  return summary;
}

// ---------------------------------------------------------------------------
// stationary

inline Json report_json(const FixedPointReport& r) {
  Json j;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["residuals"] = r.residuals;
  j["coupled_residual"] = r.coupled_residual;
  j["phi_min"] = r.phi_min;
  j["phi_max"] = r.phi_max;
  j["c_min"] = r.c_min;
  j["c_max"] = r.c_max;
  j["uniqueness_note"] = r.uniqueness_note;
  if (r.uniqueness) {
    j["uniqueness"]["C"] = r.uniqueness->C;
    j["uniqueness"]["threshold"] = r.uniqueness->threshold;
    j["uniqueness"]["satisfied"] = r.uniqueness->satisfied;
    j["uniqueness"]["branches"] = r.uniqueness->branches;
    j["uniqueness"]["poincare_constant"] = r.uniqueness->poincare;
  } else {
    j["uniqueness"] = nullptr;
  }
  if (r.positivity) {
    j["positivity"]["C1"] = r.positivity->C1;
    j["positivity"]["bound"] = r.positivity->bound;
    j["positivity"]["satisfied"] = r.positivity->satisfied;
  } else {
    j["positivity"] = nullptr;
  }
  j["positivity_warning"] = r.positivity_warning;
  return j;
}

inline Json run_stationary(const RunConfig& cfg, const ArtifactWriter& w) {
  const StationaryProblem p = stationary_problem(cfg);
  const StationarySolver solver(p);
  const auto rep = fixed_point_solve(solver, Field(p.grid.nodes(), solver.phi_star()));
  std::string csv = "x,phi,c\n";
  for (std::size_t i = 0; i < p.grid.nodes(); ++i) csv += num(p.grid.x(i)) + "," + num(rep.phi[i]) + "," + num(rep.c[i]) + "\n";
  w.text("stationary.csv", csv);
  Json report = report_json(rep);
  w.json("report.json", report);
  w.text("plot.gp",
         "set datafile separator ','\n"
         "set key autotitle columnhead\n"
         "set xlabel 'x'\n"
         "plot 'stationary.csv' using 1:2 with lines, '' using 1:3 with lines\n");
  w.metadata(cfg, {"stationary.csv", "report.json", "plot.gp"});
  if (!rep.converged) throw SolveError("fixed point did not converge in " + std::to_string(rep.iterations) + " iterations");
  return report;
}

// ---------------------------------------------------------------------------
// dependence

inline Json run_dependence(const RunConfig& cfg, const ArtifactWriter& w) {
  const EvolutionProblem p = evolution_problem(cfg);
  Json rows = Json::array();
  double lo = HUGE_VAL, hi = 0.0;
  std::string csv = "epsilon,lhs,rhs,ratio\n";
  for (double eps : cfg.epsilons) {
    const auto r = continuous_dependence_experiment(p, eps);
    Json j;
    j["epsilon"] = eps;
    j["weak_phi"] = r.weak_phi;
    j["phi_monotone"] = r.phi_monotone;
    j["c_h1"] = r.c_h1;
    j["c_trace"] = r.c_trace;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["ratio"] = r.zero_over_zero ? Json(nullptr) : Json(r.ratio);
    j["zero_over_zero"] = r.zero_over_zero;
    rows.push_back(j);
    csv += num(eps) + "," + num(r.lhs) + "," + num(r.rhs) + "," + num(r.ratio) + "\n";
    if (!r.zero_over_zero) {
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
  }
  Json report;
  report["runs"] = rows;
  report["ratio_spread"] = hi > 0.0 ? Json(hi / lo) : Json(nullptr);
  w.json("dependence.json", report);
  w.text("dependence.csv", csv);
  w.text("plot.gp",
         "set datafile separator ','\n"
         "set logscale x\n"
         "set xlabel 'epsilon'\n"
         "set ylabel 'lhs / rhs'\n"
         "plot 'dependence.csv' using 1:4 with linespoints title 'ratio'\n");
  w.metadata(cfg, {"dependence.json", "dependence.csv", "plot.gp"});
  return report;
}

// ---------------------------------------------------------------------------
// dump

inline std::string constitutive_table(const RunConfig& cfg) {
  const ConstitutivePair pair = build_pair(cfg.law);
  const double hi = pair.domain_upper() ? std::min(cfg.phi_max, 0.999 * *pair.domain_upper()) : cfg.phi_max;
  std::string s = "s,sigma,Phi,Phi_prime\n";
  for (int k = 0; k < cfg.dump_samples; ++k) {
    const double x = hi * k / (cfg.dump_samples - 1);
    double sig;
    try {
      sig = pair.sigma(x);
    } catch (const DomainError&) {
      sig = std::nan("");
    }
    s += num(x) + "," + num(sig) + "," + num(pair.phi(x)) + "," + num(pair.phi_prime(x)) + "\n";
  }
  return s;
}

inline std::string kinetics_table(const RunConfig& cfg) {
  const Grid1D grid = config_grid(cfg);
  const ConstitutivePair pair = build_pair(cfg.law);
  const KineticsSpec spec = config_kinetics(cfg, grid, pair);
  const double cb = max_c_b(grid);
  std::string s = "phi,c,gamma_T,Q_T,gamma_H,Q_H\n";
  for (int a = 0; a < cfg.dump_samples; ++a) {
    const double ph = cfg.phi_max * a / (cfg.dump_samples - 1);
    for (int b = 0; b < cfg.dump_samples; ++b) {
      const double c = cb * b / (cfg.dump_samples - 1);
      s += num(ph) + "," + num(c) + "," + num(gamma_eval(spec, Population::Tumor, ph, c)) + "," +
           num(q_absorption_eval(spec, Population::Tumor, ph, c)) + "," + num(gamma_eval(spec, Population::Host, ph, c)) +
           "," + num(q_absorption_eval(spec, Population::Host, ph, c)) + "\n";
    }
  }
  return s;
}

inline Json run_dump(const RunConfig& cfg, const ArtifactWriter& w) {
  const bool cons = cfg.dump_target == "constitutive";
  const std::string file = cons ? "constitutive.csv" : "kinetics.csv";
  w.text(file, cons ? constitutive_table(cfg) : kinetics_table(cfg));
  w.text("plot.gp", cons ? "set datafile separator ','\nset key autotitle columnhead\nset xlabel 's'\n"
                           "plot 'constitutive.csv' using 1:3 with lines, '' using 1:4 with lines\n"
                         : "set datafile separator ','\nset xlabel 'phi'\nset ylabel 'c'\n"
                           "splot 'kinetics.csv' using 1:2:3 with points title 'Gamma_T'\n");
  w.metadata(cfg, {file, "plot.gp"});
  Json j;
  j["mode"] = "dump";
  j["target"] = cfg.dump_target;
  j["file"] = file;
  return j;
}

// ---------------------------------------------------------------------------
// selftest

struct SelftestCheck {
  std::string name;
  double value = 0.0, tolerance = 0.0;
  bool pass = false;
};

/// Poisson oracles, Poincare constant, constitutive round trips and the
/// trivial steady states of both solvers.
inline std::vector<SelftestCheck> selftest_checks() {
  std::vector<SelftestCheck> out;
  auto add = [&](std::string name, double value, double tol) { out.push_back({std::move(name), value, tol, value <= tol}); };
  for (int n : {16, 64, 256}) {
    const Grid1D g = build_grid(n);
    const PoissonOperator op(g);
    const Field u = op.apply(Field(g.nodes(), 1.0));
    double e = 0.0;
    for (std::size_t i = 0; i < g.nodes(); ++i) e = std::max(e, std::abs(u[i] - 0.5 * (1 - g.x(i) * g.x(i))));
    add("poisson.P1.n" + std::to_string(n), e, 2 * g.h * g.h);
    add("poisson.weak_norm.n" + std::to_string(n), std::abs(op.weak_norm_squared(Field(g.nodes(), 1.0)) - 1.0 / 3.0),
        5 * g.h * g.h);
  }
  add("poincare.n1024", std::abs(poincare_constant(build_grid(1024)).constant / (2.0 / std::numbers::pi) - 1.0), 0.02);

  const std::vector<StressLaw> laws = {PolynomialOvershoot(1.0, 1.0, 2, 0.5), SaturatingHump(1.0, 1.0),
                                       PowerAdhesive(2.0, 0.5), AsymptoticBlowup(1.0, 0.5, 1.0)};
  for (const auto& law : laws) {
    const ConstitutivePair pair = build_pair(law);
    double e = 0.0;
    for (int k = 1; k < 50; ++k) {
      const double s = 0.98 * k / 50.0;
      e = std::max(e, std::abs(pair.phi_inverse(pair.phi(s)) - s));
    }
    add("constitutive.roundtrip." + law_name(law), e, 1e-10);
  }

  {
    EvolutionProblem p;
    p.grid = build_grid(32);
    p.spec = build_kinetics(Factored{}, LinearUptake{0.0}, 0.0, 1.0, 1.0);
    p.phi0.assign(p.grid.nodes(), 0.5);
    p.c0.assign(p.grid.nodes(), 1.0);
    p.t_max = 0.05;
    const auto tr = run(p);
    double e = 0.0;
    for (std::size_t i = 0; i < p.grid.nodes(); ++i)
      e = std::max({e, std::abs(tr.snapshots.back().phi[i] - 0.5), std::abs(tr.snapshots.back().c[i] - 1.0)});
    add("evolution.trivial_steady_state", e, 1e-12);
  }
  {
    StationaryProblem p;
    p.grid = build_grid(32);
    p.spec = build_kinetics(Factored{}, LinearUptake{0.0}, 0.0, 1.0, 1.0);
    const auto rep = fixed_point_solve(p, Field(p.grid.nodes(), 0.2));
    double e = 0.0;
    for (std::size_t i = 0; i < p.grid.nodes(); ++i) e = std::max({e, std::abs(rep.phi[i] - 0.5), std::abs(rep.c[i] - 1.0)});
    add("stationary.trivial_fixed_point", e, 1e-12);
    add("stationary.trivial_iterations", rep.iterations, 2);
  }
  return out;
}

inline Json run_selftest(std::optional<ArtifactWriter> w) {
  Json checks = Json::array();
  bool ok = true;
  for (const auto& c : selftest_checks()) {
    Json j;
    j["name"] = c.name;
    j["value"] = c.value;
    j["tolerance"] = c.tolerance;
    j["pass"] = c.pass;
    checks.push_back(j);
    ok = ok && c.pass;
  }
  Json report;
  report["mode"] = "selftest";
  report["pass"] = ok;
  report["checks"] = checks;
  if (w) w->json("selftest.json", report);
  return report;
}

/// Runs the configured mode, writing into `out_dir`.
inline Json orchestrate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.mode == Mode::Selftest) return run_selftest(ArtifactWriter(out_dir));
  const ArtifactWriter w(out_dir);
  switch (cfg.mode) {
    case Mode::Evolve: return run_evolve(cfg, w);
    case Mode::Stationary: return run_stationary(cfg, w);
    case Mode::Dependence: return run_dependence(cfg, w);
    default: return run_dump(cfg, w);
  }
}

}  // namespace mpg
