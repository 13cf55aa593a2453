#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "lrla/config.hpp"

namespace lrla {

// Grid training: one checkpoint and diagnostics CSV per (nhat, seed) cell.
// Cells run independently (LRLA_WORKERS controls the worker count); a failed
// cell is recorded in the manifest and does not stop the others.
int cmd_train(const ExperimentConfig& config, std::ostream& log);

struct SimulateOptions {
  std::string policy;  // value | thompson | ucb | lrla
  std::string checkpoint;
  int episodes = 1000;
  bool map_mode = false;  // lrla only; default redraws weights per episode
  std::optional<std::uint64_t> seed;
  std::string output_dir;
};
int cmd_simulate(const ExperimentConfig& config, const SimulateOptions& options,
                 std::ostream& log);

struct FitProbitOptions {
  std::string traj_file;   // exactly one of traj_file / human_file
  std::string human_file;
  std::string output_dir;
};
int cmd_fit_probit(const ExperimentConfig& config, const FitProbitOptions& options,
                   std::ostream& log);

struct CompareOptions {
  std::string human_file;
  std::string checkpoint_dir;
  std::string output_dir;
};
int cmd_compare(const ExperimentConfig& config, const CompareOptions& options,
                std::ostream& log);

struct ClusterOptions {
  std::string coefficients_file;
  std::optional<double> bandwidth;
  std::string output_dir;
};
int cmd_cluster(const ExperimentConfig& config, const ClusterOptions& options,
                std::ostream& log);

struct RegretOptions {
  std::string checkpoint_dir;
  int episodes = 1000;
  std::string output_dir;
};
int cmd_regret(const ExperimentConfig& config, const RegretOptions& options,
               std::ostream& log);

// checkpoint/diagnostics naming shared by train, compare, and regret
std::string checkpoint_filename(int nhat, std::uint64_t seed);
std::string diagnostics_filename(int nhat, std::uint64_t seed);

int worker_count_from_env();

}  // namespace lrla
