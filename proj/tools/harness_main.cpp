#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "slowheat/errors.hpp"
#include "slowheat/harness/experiments.hpp"
#include "slowheat/harness/io.hpp"
#include "slowheat/kernels.hpp"
#include "slowheat/version.hpp"

namespace {

nlohmann::json load_config(const std::string& path, const std::string& name) {
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(slowheat::harness::read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw slowheat::validation_error(std::string("config: ") + e.what());
  }
  if (!config.is_object())
    throw slowheat::validation_error("config: expected a JSON object");
  if (!config.contains("experiment"))
    config["experiment"] = name;
  else if (config["experiment"] != name)
    throw slowheat::validation_error(
        "experiment: config says '" +
        config["experiment"].get<std::string>() + "' but the subcommand is '" +
        name + "'");
  return config;
}

void announce(const slowheat::harness::RunManifest& m) {
  std::cout << m.experiment << ": wrote " << m.outputs.size() << " output"
            << (m.outputs.size() == 1 ? "" : "s") << " (manifest "
            << m.experiment << "_manifest.json)\n";
  for (const std::string& w : m.warnings)
    std::cout << "  warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Simulation and estimation toolkit for slow points of the stochastic "
      "heat equation"};
  app.set_version_flag("--version", slowheat::kToolVersion);
  app.require_subcommand(1);

  std::uint64_t seed = 0x5eed5eedULL;
  int threads = 1;
  std::string out_dir;
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "master RNG seed (overrides the config)");
  app.add_option("--threads", threads, "worker budget (replicas run serially)");
  app.add_option("--out", out_dir,
                 "output directory (default $SLOWHEAT_OUT or ./out)");

  struct SubSpec {
    const char* name;
    const char* blurb;
    CLI::App* cmd = nullptr;
    std::string config_path = {};
  };
  std::vector<SubSpec> subs = {
      {"cov", "evaluate the linearization-field covariance closed form"},
      {"localize-check", "check localization defects against the bound"},
      {"sample-h", "sample exact Gaussian paths and calibrate"},
      {"simulate", "coupled finite-difference runs and error profiles"},
      {"exponent", "Monte-Carlo boundary-crossing exponent curve"},
      {"smallball-u", "nonlinear small-ball survival vs the Gaussian side"},
      {"slowset", "slow-site census, box dimension, theory comparison"},
  };
  double cov_t = 0, cov_s = 0, cov_x = 0, cov_y = 0;
  CLI::Option *cov_t_opt = nullptr, *cov_s_opt = nullptr, *cov_x_opt = nullptr,
              *cov_y_opt = nullptr;
  for (SubSpec& s : subs) {
    s.cmd = app.add_subcommand(s.name, s.blurb);
    s.cmd->fallthrough();
    CLI::Option* cfg = s.cmd->add_option("--config", s.config_path,
                                         "experiment config (JSON)");
    if (std::string(s.name) == "cov") {
      cov_t_opt = s.cmd->add_option("--t", cov_t, "first time");
      cov_s_opt = s.cmd->add_option("--s", cov_s, "second time");
      cov_x_opt = s.cmd->add_option("--x", cov_x, "first site");
      cov_y_opt = s.cmd->add_option("--y", cov_y, "second site");
    } else {
      cfg->required();
    }
  }
  CLI::App* report_cmd =
      app.add_subcommand("report", "assemble report.md from run manifests");
  report_cmd->fallthrough();
  std::string report_dir;
  report_cmd->add_option("--dir", report_dir,
                         "directory holding run manifests (default --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are validation failures
  }

  slowheat::harness::RunOptions opts;
  if (!out_dir.empty())
    opts.out_dir = out_dir;
  else if (const char* env = std::getenv("SLOWHEAT_OUT"))
    opts.out_dir = env;
  opts.master_seed = seed;
  opts.seed_overridden = seed_opt->count() > 0;
  opts.threads = threads;

  try {
    if (report_cmd->parsed()) {
      const auto dir = report_dir.empty() ? opts.out_dir
                                          : std::filesystem::path(report_dir);
      announce(slowheat::harness::run_report(dir, opts));
      return 0;
    }
    for (const SubSpec& s : subs)
      if (s.cmd->parsed()) {
        if (std::string(s.name) == "cov" && s.config_path.empty()) {
          if (!(cov_t_opt->count() && cov_s_opt->count() &&
                cov_x_opt->count() && cov_y_opt->count()))
            throw slowheat::validation_error(
                "cov: give --config, or all of --t --s --x --y");
          std::printf("%.6g\n", slowheat::kernels::cov_h(cov_t, cov_x, cov_s,
                                                         cov_y));
          return 0;
        }
        announce(slowheat::harness::run_experiment(
            load_config(s.config_path, s.name), opts));
        return 0;
      }
  } catch (const slowheat::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const slowheat::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
