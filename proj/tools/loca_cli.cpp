// Command-line front end for the experiment suite. Talks to the shared
// library exclusively through the C API in loca/loca.h; each subcommand maps
// onto one experiment and exits 0 on success, 1 on configuration errors, and
// 2 when a run finishes but an acceptance tolerance fails.

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loca/loca.h"

namespace {

struct ConfigDeleter {
  void operator()(loca_config* cfg) const { loca_config_destroy(cfg); }
};
using ConfigPtr = std::unique_ptr<loca_config, ConfigDeleter>;

int exit_code_of(loca_status status) {
  switch (status) {
    case LOCA_OK: return 0;
    case LOCA_ERR_ACCEPTANCE: return 2;
    default: return 1;
  }
}

struct CommonOptions {
  std::string seed;
  std::string out = "runs";
  std::string workers;
  std::string config_file;
  std::map<std::string, std::string> overrides;
};

void attach_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--seed", opts.seed, "master seed (required; every reported number is seeded)");
  cmd->add_option("--out", opts.out, "output directory for CSV/JSON reports")
      ->capture_default_str();
  cmd->add_option("--workers", opts.workers, "worker threads (results are worker-count independent)");
  cmd->add_option("--config", opts.config_file, "flat key = value config file; CLI flags win");
}

// Maps a CLI flag onto a config key; only set flags are forwarded.
void attach_value(CLI::App* cmd, CommonOptions& opts, const std::string& flag,
                  const std::string& key, const std::string& help) {
  auto holder = std::make_shared<std::string>();
  cmd->add_option(flag, *holder, help)->each([&opts, key, holder](const std::string& value) {
    opts.overrides[key] = value;
  });
}

int run(const std::string& name, const CommonOptions& opts) {
  ConfigPtr cfg(loca_config_create());
  if (!opts.seed.empty()) loca_config_set(cfg.get(), "seed", opts.seed.c_str());
  if (!opts.workers.empty()) loca_config_set(cfg.get(), "workers", opts.workers.c_str());
  for (const auto& [key, value] : opts.overrides)
    loca_config_set(cfg.get(), key.c_str(), value.c_str());
  if (!opts.config_file.empty()) {
    loca_status st = loca_config_load_file(cfg.get(), opts.config_file.c_str());
    if (st != LOCA_OK) {
      std::fprintf(stderr, "error: %s\n", loca_last_error());
      return 1;
    }
  }
  loca_status st = loca_run_experiment(name.c_str(), cfg.get(), opts.out.c_str());
  if (st == LOCA_OK)
    std::printf("%s\n", loca_last_error());
  else
    std::fprintf(stderr, "%s: %s\n", st == LOCA_ERR_ACCEPTANCE ? "FAIL" : "error",
                 loca_last_error());
  return exit_code_of(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loca: sparse spectral adaptation laboratory (v" +
               std::string(loca_version()) + ")"};
  app.require_subcommand(1);

  std::map<std::string, CommonOptions> opts;
  std::vector<std::pair<std::string, CLI::App*>> commands;

  auto add = [&](const std::string& name, const std::string& desc) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    attach_common(cmd, opts[name]);
    commands.emplace_back(name, cmd);
    return cmd;
  };

  {
    CLI::App* cmd = add("theorem1", "reconstruction-error ordering of the four schemes");
    attach_value(cmd, opts["theorem1"], "--K", "K", "comma list of matrix sizes");
    attach_value(cmd, opts["theorem1"], "--r", "r", "comma list of ranks (each r < K/3)");
    attach_value(cmd, opts["theorem1"], "--trials", "trials", "Monte Carlo trials per cell");
  }
  {
    CLI::App* cmd = add("theorem2", "expected-error equality of top DFT slots vs top DCT cells");
    attach_value(cmd, opts["theorem2"], "--K", "K", "matrix size");
    attach_value(cmd, opts["theorem2"], "--budget", "budget", "retained coefficient count");
    attach_value(cmd, opts["theorem2"], "--trials", "trials", "Monte Carlo trials");
  }
  {
    CLI::App* cmd = add("noniid", "critical correlation sweep (low-rank vs top-DCT)");
    attach_value(cmd, opts["noniid"], "--K", "K", "matrix size");
    attach_value(cmd, opts["noniid"], "--r", "r", "comma list of ranks");
    attach_value(cmd, opts["noniid"], "--rho-grid", "rho_grid", "comma list of correlations");
    attach_value(cmd, opts["noniid"], "--trials", "trials", "trials per grid point");
  }
  {
    CLI::App* cmd = add("mp", "Marchenko-Pastur outside-mass diagnostic");
    attach_value(cmd, opts["mp"], "--K", "K", "matrix size");
    attach_value(cmd, opts["mp"], "--seeds", "seeds", "number of seeds");
    attach_value(cmd, opts["mp"], "--trials", "trials", "matrices averaged per seed");
    attach_value(cmd, opts["mp"], "--rho-grid", "rho_grid", "comma list of correlations");
  }
  {
    CLI::App* cmd = add("normality", "bootstrap TV hypothesis-test calibration");
    attach_value(cmd, opts["normality"], "--dim", "dim", "matrix side length");
    attach_value(cmd, opts["normality"], "--seeds", "seeds", "number of seeds per distribution");
    attach_value(cmd, opts["normality"], "--epsilon", "epsilon", "TV acceptance threshold");
  }
  {
    CLI::App* cmd = add("toy", "alternating-optimization regression experiment");
    attach_value(cmd, opts["toy"], "--seeds", "seeds", "number of task seeds");
    attach_value(cmd, opts["toy"], "--total-steps", "total_steps", "training steps");
    attach_value(cmd, opts["toy"], "--alternating-steps", "alternating_steps",
                 "steps before locations freeze");
    attach_value(cmd, opts["toy"], "--lr-coeff", "lr_coeff", "coefficient learning rate");
    attach_value(cmd, opts["toy"], "--lr-loc", "lr_loc", "location learning rate");
  }
  {
    CLI::App* cmd = add("gradcheck", "gradient oracle and finite-difference checks");
    attach_value(cmd, opts["gradcheck"], "--cases", "cases", "number of random cases");
  }
  {
    CLI::App* cmd = add("bench", "sparse / fast / dense inverse-DCT timing comparison");
    attach_value(cmd, opts["bench"], "--sizes", "sizes", "comma list of square sizes");
    attach_value(cmd, opts["bench"], "--budgets", "budgets", "comma list of coefficient budgets");
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& [name, cmd] : commands)
    if (cmd->parsed()) return run(name, opts[name]);
  return 1;
}
