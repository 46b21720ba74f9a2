#pragma once

#include <string>

#include "report.hpp"

namespace loca {

enum class RunStatus {
  ok = 0,
  config_error = 1,
  acceptance_failure = 2,
};

struct RunOutcome {
  RunStatus status = RunStatus::ok;
  std::string message;
};

// Known experiment names: theorem1, theorem2, noniid, mp, normality, toy,
// gradcheck, bench. Each writes <name>.csv and <name>.json under out_dir
// (toy additionally writes per-seed loss and location trajectories).
// A master seed is required in the config for every experiment.
RunOutcome run_experiment(const std::string& name, const KvConfig& config,
                          const std::string& out_dir);

const char* version_string();

}  // namespace loca
