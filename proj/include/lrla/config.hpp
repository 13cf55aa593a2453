#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrla/bandit.hpp"
#include "lrla/trainer.hpp"

namespace lrla {

struct AnalysisConfig {
  double ridge = 0.01;
  double bandwidth = 0.0;  // 0 selects Silverman's rule
  int sim_episodes = 1000;
};

struct ExperimentConfig {
  TaskDistribution task;
  TrainConfig train;
  AnalysisConfig analysis;
  std::vector<int> nhat_grid = {256, 512, 1024, 2048, 4096, 8192};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::string output_dir = "runs/out";

  void validate() const;
};

// Plain-text config with [section] headers and key = value lines; '#' starts
// a comment. Every key is optional (defaults live in code); unknown keys are
// rejected with their line number.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Full resolved config, echoed into run manifests.
nlohmann::json experiment_config_json(const ExperimentConfig& config);

}  // namespace lrla
