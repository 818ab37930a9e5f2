// mpgrowth: command-line driver for the tumor/host growth solvers.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mpg/orchestrate.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

mpg::Json read_root(const Options& opt) {
  if (opt.config.empty()) return mpg::Json::object();
  std::ifstream in(opt.config);
  if (!in) throw mpg::ParseError("cannot read config file " + opt.config);
  std::stringstream ss;
  ss << in.rdbuf();
  return mpg::parse_config_text(ss.str(), opt.config);
}

int execute(const Options& opt, const std::string& mode, const std::string& dump_target) {
  mpg::Json root = read_root(opt);
  if (!root.is_object()) throw mpg::ParseError(opt.config + ": top level must be an object");
  root["mode"] = mode;
  if (mode == "dump") root["dump"]["target"] = dump_target;
  if (opt.seed) {
    const bool constant = root.contains("initial") && root["initial"].is_object() &&
                          root["initial"].value("type", std::string("random")) == "constant";
    if (!constant) root["initial"]["seed"] = *opt.seed;
  }
  const mpg::RunConfig cfg = mpg::config_from_json(root);
  const std::string out = opt.out.empty() ? cfg.out_dir : opt.out;
  const mpg::Json result = mpg::orchestrate(cfg, out);
  if (!opt.quiet) std::cout << result.dump(2) << "\n";
  if (mode == "selftest" && !result.value("pass", false)) {
    std::cerr << mpg::error_json("SelftestFailure", "one or more selftest checks failed", mpg::kExitSolver).dump(2)
              << "\n";
    return mpg::kExitSolver;
  }
  return mpg::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiphase tumor growth simulator"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config, "JSON configuration file");
  app.add_option("--out", opt.out, "output directory (overrides output.dir)");
  app.add_option("--seed", opt.seed, "seed for random initial data");
  app.add_flag("--quiet", opt.quiet, "suppress the JSON summary on stdout");

  std::string mode, dump_target = "constitutive";
  auto sub = [&](const std::string& name, const std::string& help) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };
  sub("evolve", "time-dependent run")->callback([&] { mode = "evolve"; });
  auto* stat = sub("stationary", "stationary fixed point");
  std::string action;
  stat->add_option("action", action, "optional 'solve'")->check(CLI::IsMember({"solve"}));
  stat->callback([&] { mode = "stationary"; });
  sub("dependence", "continuous-dependence experiment")->callback([&] { mode = "dependence"; });
  sub("selftest", "built-in oracle checks")->callback([&] { mode = "selftest"; });
  auto* dump = sub("dump", "tabulate constitutive or kinetic functions");
  dump->add_option("target", dump_target, "constitutive | kinetics")->required()->check(
      CLI::IsMember({"constitutive", "kinetics"}));
  dump->callback([&] { mode = "dump"; });
  // Per-module aliases.
  auto* cons = sub("constitutive", "constitutive tools");
  cons->add_subcommand("dump", "same as 'dump constitutive'")->fallthrough()->callback([&] {
    mode = "dump";
    dump_target = "constitutive";
  });
  cons->require_subcommand(1);
  auto* kin = sub("kinetics", "kinetics tools");
  kin->add_subcommand("table", "same as 'dump kinetics'")->fallthrough()->callback([&] {
    mode = "dump";
    dump_target = "kinetics";
  });
  kin->require_subcommand(1);
  auto* poi = sub("poisson", "Poisson tools");
  poi->add_subcommand("selftest", "same as 'selftest'")->fallthrough()->callback([&] { mode = "selftest"; });
  poi->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << mpg::error_json("UsageError", e.what(), mpg::kExitConfig).dump(2) << "\n";
    return mpg::kExitConfig;
  }

  try {
    return execute(opt, mode, dump_target);
  } catch (const mpg::ValidationError& e) {
    std::cerr << mpg::error_json(e.kind(), e.what(), mpg::kExitConfig, e.issues()).dump(2) << "\n";
    return mpg::kExitConfig;
  } catch (const mpg::Error& e) {
    const int code = mpg::exit_code_for(e);
    std::cerr << mpg::error_json(e.kind(), e.what(), code).dump(2) << "\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << mpg::error_json("InternalError", e.what(), mpg::kExitInternal).dump(2) << "\n";
    return mpg::kExitInternal;
  }
}
