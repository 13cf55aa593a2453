#pragma once

#include <cstdint>
#include <vector>

#include "lrla/bandit.hpp"
#include "lrla/varbayes.hpp"

namespace lrla {

struct TrainConfig {
  // nhat = 0 trains the unconstrained model: KL weight exactly zero, the
  // posterior still sampled per episode.
  int nhat = 1024;
  double sigma_y = 1.0;  // likelihood scale, in scaled-reward units
  int n_step = 5;
  double gamma = 0.95;
  int parallel_envs = 16;
  int episodes_total = 20000;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int target_sync_every = 100;
  std::uint64_t seed = 0;
  int hidden_dim = 64;
  double reward_scale = 10.0;
  double tau0 = 1e-5;

  double kl_weight() const { return nhat == 0 ? 0.0 : 1.0 / nhat; }
  void validate() const;
};

struct DiagnosticsRow {
  long episode = 0;
  double loss = 0.0;
  double kl = 0.0;
  double mean_regret_window = 0.0;
};

struct TrainState {
  VariationalPosterior posterior;
  NetParams target_params;
  Eigen::VectorXd adam_m, adam_v;
  long adam_steps = 0;
  long episode_count = 0;  // rounds of parallel episodes completed
  std::vector<DiagnosticsRow> diagnostics;

  explicit TrainState(const NetShape& shape) : posterior(shape) {}
};

// One environment's complete episode plus its n-step targets (scaled-reward
// units, target network Q-values).
struct EnvEpisode {
  std::vector<Eigen::VectorXd> inputs;
  std::vector<int> actions;
  std::vector<double> scaled_rewards;
  std::vector<double> targets;
  Trajectory traj;
};

struct TransitionBatch {
  std::vector<EnvEpisode> envs;

  int total_transitions() const;
};

// y_t = sum_{k<n} gamma^k r_{t+k} + gamma^n max_a Q(X_{t+n}, a), truncated to
// the pure Monte Carlo tail when t + n runs past the final step.
std::vector<double> nstep_targets(const std::vector<double>& rewards,
                                  const std::vector<Eigen::VectorXd>& target_q, int n,
                                  double gamma);

// Loss to minimize: mean over transitions of (y - Q)^2 / (2 sigma_y^2), plus
// kl_weight * [Gaussian KL + single-sample scale-factor KL at `sample`].
double objective(const TransitionBatch& batch, const PosteriorSample& sample,
                 const VariationalPosterior& q, const TrainConfig& cfg);

TrainState init_train_state(const TrainConfig& cfg, const TaskDistribution& dist);

// k fresh tasks, one posterior sample per environment held fixed for the
// whole episode, greedy Q-argmax actions, targets from the MAP target net.
TransitionBatch collect_episodes(const TrainState& state, const TrainConfig& cfg,
                                 const TaskDistribution& dist, RandomStream& rng);

// One fresh shared sample, reparametrized gradients of the objective, one
// Adam update of all posterior parameters. Returns the loss and KL estimate.
struct StepDiagnostics {
  double loss = 0.0;
  double kl = 0.0;
};
StepDiagnostics train_step(TrainState& state, const TransitionBatch& batch,
                           const TrainConfig& cfg, RandomStream& rng);

TrainState train(const TrainConfig& cfg, const TaskDistribution& dist);

enum class EvalMode { kMap, kPosteriorSample };

struct EvalResult {
  std::vector<Trajectory> trajectories;
  double mean_regret = 0.0;
};

EvalResult evaluate(const VariationalPosterior& posterior, const TrainConfig& cfg,
                    const TaskDistribution& dist, int episodes, EvalMode mode,
                    std::uint64_t eval_seed);

// Mean pseudo-regret of a uniformly random policy on this task family:
// horizon * E[max(mu) - mean(mu)] for two arms.
double random_policy_regret(const TaskDistribution& dist);

}  // namespace lrla
