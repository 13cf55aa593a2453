#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "lrla/harness.hpp"

namespace {

lrla::ExperimentConfig resolve_config(const std::string& config_path,
                                      const std::optional<std::uint64_t>& seed,
                                      const std::string& output_dir) {
  lrla::ExperimentConfig config =
      config_path.empty() ? lrla::ExperimentConfig{} : lrla::load_config_file(config_path);
  if (seed) config.train.seed = *seed;
  if (!output_dir.empty()) config.output_dir = output_dir;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resource-constrained learned bandit algorithms: training, "
               "simulation, and strategy analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "experiment config file")->capture_default_str();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", output_dir, "output directory");

  auto* train = app.add_subcommand("train", "train the (nhat x seed) grid");

  auto* simulate = app.add_subcommand("simulate", "roll out a policy and export trajectories");
  lrla::SimulateOptions sim_opts;
  simulate->add_option("--policy", sim_opts.policy, "value | thompson | ucb | lrla")->required();
  simulate->add_option("--ckpt", sim_opts.checkpoint, "checkpoint file (lrla policy)");
  simulate->add_option("--episodes", sim_opts.episodes, "episode count")->capture_default_str();
  simulate->add_flag("--map", sim_opts.map_mode, "use MAP parameters for every episode");

  auto* fit = app.add_subcommand("fit-probit", "fit probit coefficients per entity");
  lrla::FitProbitOptions fit_opts;
  fit->add_option("--traj", fit_opts.traj_file, "trajectory CSV");
  fit->add_option("--human", fit_opts.human_file, "human-data CSV");

  auto* compare = app.add_subcommand("compare", "Bayesian model comparison on human data");
  lrla::CompareOptions cmp_opts;
  compare->add_option("--human", cmp_opts.human_file, "human-data CSV")->required();
  compare->add_option("--ckpt-dir", cmp_opts.checkpoint_dir, "trained checkpoint directory")
      ->required();

  auto* cluster = app.add_subcommand("cluster", "mean-shift clustering of coefficients");
  lrla::ClusterOptions clu_opts;
  cluster->add_option("--coeffs", clu_opts.coefficients_file, "coefficient CSV")->required();
  std::optional<double> bandwidth;
  cluster->add_option("--bandwidth", bandwidth, "kernel bandwidth (default Silverman)");

  auto* regret = app.add_subcommand("regret", "evaluate per-checkpoint regret");
  lrla::RegretOptions reg_opts;
  regret->add_option("--ckpt-dir", reg_opts.checkpoint_dir, "trained checkpoint directory")
      ->required();
  regret->add_option("--episodes", reg_opts.episodes, "evaluation episodes")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    const lrla::ExperimentConfig config = resolve_config(config_path, seed, output_dir);
    if (train->parsed()) return lrla::cmd_train(config, std::cout);
    if (simulate->parsed()) {
      sim_opts.seed = seed;
      sim_opts.output_dir = config.output_dir;
      return lrla::cmd_simulate(config, sim_opts, std::cout);
    }
    if (fit->parsed()) {
      fit_opts.output_dir = config.output_dir;
      return lrla::cmd_fit_probit(config, fit_opts, std::cout);
    }
    if (compare->parsed()) {
      cmp_opts.output_dir = config.output_dir;
      return lrla::cmd_compare(config, cmp_opts, std::cout);
    }
    if (cluster->parsed()) {
      clu_opts.bandwidth = bandwidth;
      clu_opts.output_dir = config.output_dir;
      return lrla::cmd_cluster(config, clu_opts, std::cout);
    }
    if (regret->parsed()) {
      reg_opts.output_dir = config.output_dir;
      return lrla::cmd_regret(config, reg_opts, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
