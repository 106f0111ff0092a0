// Command-line front end for the coupled polymer-flow laboratory.
//
//   polykin run <config>             full coupled simulation
//   polykin verify-closure <config>  kinetic vs closed-stress comparison (q=1)
//   polykin relax <config>           quiescent relaxation study
//   polykin pathology --nmax N --t T heat-flow entropy demonstration
//   polykin selftest                 built-in verification battery
//   polykin moments-selftest         moment-toolkit battery

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "polykin/config.hpp"
#include "polykin/pathology.hpp"
#include "polykin/runner.hpp"
#include "polykin/selftest.hpp"

namespace {

struct CommonOpts {
  std::string output_dir;
  long long seed = -1;
  bool quiet = false;
};

polykin::SimConfig load_with_overrides(const std::string& path,
                                       const CommonOpts& opts) {
  polykin::SimConfig cfg = polykin::load_config(path);
  if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
  if (opts.seed >= 0) cfg.seed = std::uint64_t(opts.seed);
  if (opts.quiet) cfg.quiet = true;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--output-dir", opts.output_dir, "Override the output directory");
  sub->add_option("--seed", opts.seed, "Override the RNG seed");
  sub->add_flag("--quiet", opts.quiet, "Suppress progress output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polykin: coupled 2D flow / polymer kinetics laboratory"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string config_path;

  auto* cmd_run = app.add_subcommand("run", "Run a configured simulation");
  cmd_run->add_option("config", config_path, "Configuration file")->required();
  add_common(cmd_run, opts);

  auto* cmd_verify =
      app.add_subcommand("verify-closure", "Kinetic vs closed-stress comparison");
  cmd_verify->add_option("config", config_path, "Configuration file")->required();
  add_common(cmd_verify, opts);

  auto* cmd_relax = app.add_subcommand("relax", "Quiescent relaxation study");
  cmd_relax->add_option("config", config_path, "Configuration file")->required();
  add_common(cmd_relax, opts);

  long long nmax = 10;
  double t = 1.0;
  auto* cmd_path = app.add_subcommand("pathology", "Heat-flow entropy demo");
  cmd_path->add_option("--nmax", nmax, "Number of bumps")->required();
  cmd_path->add_option("--t", t, "Evolution time");

  long long st_seed = 1;
  double kramer_scale = 1.0;
  auto* cmd_self = app.add_subcommand("selftest", "Built-in verification battery");
  cmd_self->add_option("--seed", st_seed, "RNG seed");
  cmd_self->add_option("--perturb-kramer", kramer_scale,
                       "Sensitivity hook: scale the stress constant");

  long long mst_seed = 1;
  auto* cmd_mself =
      app.add_subcommand("moments-selftest", "Moment-toolkit battery");
  cmd_mself->add_option("--seed", mst_seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      auto res = polykin::run(load_with_overrides(config_path, opts));
      if (!res.ok) {
        std::fprintf(stderr, "run failed: %s\n", res.message.c_str());
        return 1;
      }
      return 0;
    }
    if (cmd_verify->parsed()) {
      auto cfg = load_with_overrides(config_path, opts);
      auto res = polykin::verify_closure(cfg);
      if (!res.ok) {
        std::fprintf(stderr, "verify-closure failed: %s\n", res.message.c_str());
        return 1;
      }
      std::printf("closure: final relative stress difference %.6g (L2)\n",
                  res.final_closure_rel);
      return 0;
    }
    if (cmd_relax->parsed()) {
      auto cfg = load_with_overrides(config_path, opts);
      auto res = polykin::relax(cfg);
      std::printf("relax: |f - feq|_L1 %.6g -> %.6g, stress deviation %.3e, "
                  "closed-form mismatch %.3e\n",
                  res.l1_initial, res.l1_final, res.sigma_dev_max,
                  res.ob_analytic_err);
      return res.base.ok ? 0 : 1;
    }
    if (cmd_path->parsed()) {
      double value = polykin::pathology::entropy_pathology_demo(nmax, t);
      std::printf("entropy(n_max=%lld, t=%g) = %.10g\n", nmax, t, value);
      return 0;
    }
    if (cmd_self->parsed()) {
      auto res = polykin::selftest(std::uint64_t(st_seed), kramer_scale);
      std::fputs(res.summary().c_str(), stdout);
      return res.passed() ? 0 : 1;
    }
    if (cmd_mself->parsed()) {
      auto res = polykin::moments_selftest(std::uint64_t(mst_seed));
      std::fputs(res.summary().c_str(), stdout);
      return res.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
