#include "lrla/trainer.hpp"

#include <cmath>
#include <stdexcept>

namespace lrla {

void TrainConfig::validate() const {
  if (nhat < 0) throw std::invalid_argument("TrainConfig: nhat must be >= 0");
  if (!(sigma_y > 0.0)) throw std::invalid_argument("TrainConfig: sigma_y must be > 0");
  if (n_step < 1) throw std::invalid_argument("TrainConfig: n_step must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("TrainConfig: gamma must be in (0, 1]");
  if (parallel_envs < 1) throw std::invalid_argument("TrainConfig: parallel_envs must be >= 1");
  if (episodes_total < 0) throw std::invalid_argument("TrainConfig: episodes_total must be >= 0");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("TrainConfig: bad learning_rate");
  if (target_sync_every < 1)
    throw std::invalid_argument("TrainConfig: target_sync_every must be >= 1");
  if (hidden_dim < 1) throw std::invalid_argument("TrainConfig: hidden_dim must be >= 1");
  if (!(reward_scale > 0.0)) throw std::invalid_argument("TrainConfig: reward_scale must be > 0");
  if (!(tau0 > 0.0)) throw std::invalid_argument("TrainConfig: tau0 must be > 0");
}

int TransitionBatch::total_transitions() const {
  int total = 0;
  for (const auto& env : envs) total += static_cast<int>(env.actions.size());
  return total;
}

std::vector<double> nstep_targets(const std::vector<double>& rewards,
                                  const std::vector<Eigen::VectorXd>& target_q, int n,
                                  double gamma) {
  if (n < 1) throw std::invalid_argument("nstep_targets: n must be >= 1");
  const int horizon = static_cast<int>(rewards.size());
  if (static_cast<int>(target_q.size()) != horizon)
    throw std::invalid_argument("nstep_targets: sequences misaligned");

  std::vector<double> targets(horizon);
  for (int t = 0; t < horizon; ++t) {
    double y = 0.0;
    double discount = 1.0;
    const int reward_steps = std::min(n, horizon - t);
    for (int k = 0; k < reward_steps; ++k) {
      y += discount * rewards[t + k];
      discount *= gamma;
    }
    // bootstrap only when step t+n still lies inside the episode
    if (t + n < horizon) y += discount * target_q[t + n].maxCoeff();
    targets[t] = y;
  }
  return targets;
}

double objective(const TransitionBatch& batch, const PosteriorSample& sample,
                 const VariationalPosterior& q, const TrainConfig& cfg) {
  const int total = batch.total_transitions();
  if (total == 0) throw std::invalid_argument("objective: empty batch");

  double sq_err = 0.0;
  for (const EnvEpisode& env : batch.envs) {
    const std::vector<Eigen::VectorXd> qs = forward_episode(sample.params, env.inputs);
    for (size_t t = 0; t < env.actions.size(); ++t) {
      const double residual = env.targets[t] - qs[t][env.actions[t]];
      sq_err += residual * residual;
    }
  }
  double loss = sq_err / (2.0 * cfg.sigma_y * cfg.sigma_y * total);
  const double weight = cfg.kl_weight();
  if (weight != 0.0) {
    HorseshoePrior prior{cfg.tau0};
    loss += weight * (gaussian_kl(q) + scale_kl_at_sample(q, prior, sample));
  }
  return loss;
}

TrainState init_train_state(const TrainConfig& cfg, const TaskDistribution& dist) {
  cfg.validate();
  dist.validate();
  NetShape shape{dist.num_arms + 1, cfg.hidden_dim, dist.num_arms};

  TrainState state(shape);
  RandomStream root(cfg.seed);
  RandomStream init_rng = root.derive("init");
  HorseshoePrior prior{cfg.tau0};
  state.posterior = init_posterior(shape, prior, init_rng);
  state.target_params = map_params(state.posterior);
  const int n = state.posterior.phi.flat_size();
  state.adam_m = Eigen::VectorXd::Zero(n);
  state.adam_v = Eigen::VectorXd::Zero(n);
  return state;
}

namespace {

EnvEpisode run_env_episode(const NetParams& params, const NetParams& target_params,
                           const TrainConfig& cfg, const TaskDistribution& dist,
                           RandomStream& env_rng) {
  RandomStream task_rng = env_rng.derive("task");
  const BanditTask task = sample_task(dist, task_rng);

  GreedyNetPolicy policy(params, cfg.reward_scale);
  RandomStream rollout_rng = env_rng.derive("rollout");
  EnvEpisode env;
  env.traj = rollout(task, policy, dist.horizon, rollout_rng);
  env.inputs = policy.episode_inputs();
  env.actions.reserve(dist.horizon);
  env.scaled_rewards.reserve(dist.horizon);
  for (const StepRecord& s : env.traj.steps) {
    env.actions.push_back(s.action);
    env.scaled_rewards.push_back(s.reward / cfg.reward_scale);
  }
  const std::vector<Eigen::VectorXd> target_q = forward_episode(target_params, env.inputs);
  env.targets = nstep_targets(env.scaled_rewards, target_q, cfg.n_step, cfg.gamma);
  return env;
}

}  // namespace

TransitionBatch collect_episodes(const TrainState& state, const TrainConfig& cfg,
                                 const TaskDistribution& dist, RandomStream& rng) {
  TransitionBatch batch;
  batch.envs.reserve(cfg.parallel_envs);
  for (int e = 0; e < cfg.parallel_envs; ++e) {
    RandomStream env_rng = rng.derive("env", static_cast<std::uint64_t>(e));
    RandomStream sample_rng = env_rng.derive("weights");
    const PosteriorSample sample = sample_params(state.posterior, sample_rng);
    batch.envs.push_back(
        run_env_episode(sample.params, state.target_params, cfg, dist, env_rng));
  }
  return batch;
}

StepDiagnostics train_step(TrainState& state, const TransitionBatch& batch,
                           const TrainConfig& cfg, RandomStream& rng) {
  const int total = batch.total_transitions();
  if (total == 0) throw std::invalid_argument("train_step: empty batch");
  const double kl_weight = cfg.kl_weight();
  HorseshoePrior prior{cfg.tau0};

  // one fresh sample shared by every transition's likelihood term
  RandomStream sample_rng = rng.derive("loss_sample");
  const PosteriorSample sample = sample_params(state.posterior, sample_rng);

  const double inv_denominator = 1.0 / (cfg.sigma_y * cfg.sigma_y * total);
  double sq_err = 0.0;
  ParamGradients theta_grads = NetParams::zeros(state.posterior.shape);
  for (const EnvEpisode& env : batch.envs) {
    EpisodeTape tape;
    const std::vector<Eigen::VectorXd> qs = forward_episode(sample.params, env.inputs, &tape);
    std::vector<Eigen::VectorXd> q_grads(env.inputs.size());
    for (size_t t = 0; t < env.inputs.size(); ++t) {
      q_grads[t] = Eigen::VectorXd::Zero(qs[t].size());
      const double residual = qs[t][env.actions[t]] - env.targets[t];
      sq_err += residual * residual;
      q_grads[t][env.actions[t]] = residual * inv_denominator;
    }
    const ParamGradients env_grads = backward_episode(sample.params, tape, q_grads);
    theta_grads.update_in += env_grads.update_in;
    theta_grads.update_rec += env_grads.update_rec;
    theta_grads.update_bias += env_grads.update_bias;
    theta_grads.reset_in += env_grads.reset_in;
    theta_grads.reset_rec += env_grads.reset_rec;
    theta_grads.reset_bias += env_grads.reset_bias;
    theta_grads.cand_in += env_grads.cand_in;
    theta_grads.cand_rec += env_grads.cand_rec;
    theta_grads.cand_bias += env_grads.cand_bias;
    theta_grads.head_weight += env_grads.head_weight;
    theta_grads.head_bias += env_grads.head_bias;
  }

  double loss = 0.5 * sq_err * inv_denominator;
  double kl_estimate = gaussian_kl(state.posterior) +
                       scale_kl_at_sample(state.posterior, prior, sample);
  if (kl_weight != 0.0) loss += kl_weight * kl_estimate;
  if (!std::isfinite(loss))
    throw std::runtime_error("train_step: non-finite loss at episode " +
                             std::to_string(state.episode_count));

  const PosteriorVec grads =
      grad_elbo_terms(state.posterior, sample, pack_params(theta_grads), prior, kl_weight);

  // Adam over the flattened posterior parameters
  const Eigen::VectorXd g = grads.flatten();
  Eigen::VectorXd flat = state.posterior.phi.flatten();
  state.adam_steps += 1;
  state.adam_m = cfg.adam_beta1 * state.adam_m + (1.0 - cfg.adam_beta1) * g;
  state.adam_v = cfg.adam_beta2 * state.adam_v.array().matrix() +
                 (1.0 - cfg.adam_beta2) * g.array().square().matrix();
  const double bias1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.adam_steps));
  const double bias2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.adam_steps));
  flat.array() -= cfg.learning_rate * (state.adam_m.array() / bias1) /
                  ((state.adam_v.array() / bias2).sqrt() + cfg.adam_eps);
  state.posterior.phi.unflatten(flat);

  return StepDiagnostics{loss, kl_estimate};
}

TrainState train(const TrainConfig& cfg, const TaskDistribution& dist) {
  TrainState state = init_train_state(cfg, dist);
  RandomStream root(cfg.seed);

  double regret_window_sum = 0.0;
  long regret_window_count = 0;
  constexpr long kWindow = 100;

  for (long round = 0; round < cfg.episodes_total; ++round) {
    if (round % cfg.target_sync_every == 0)
      state.target_params = map_params(state.posterior);

    RandomStream round_rng = root.derive("round", static_cast<std::uint64_t>(round));
    const TransitionBatch batch = collect_episodes(state, cfg, dist, round_rng);
    const StepDiagnostics diag = train_step(state, batch, cfg, round_rng);
    state.episode_count += 1;

    for (const EnvEpisode& env : batch.envs) {
      regret_window_sum += episode_regret(env.traj);
      regret_window_count += 1;
    }
    if ((round + 1) % kWindow == 0 || round + 1 == cfg.episodes_total) {
      state.diagnostics.push_back(DiagnosticsRow{
          round + 1, diag.loss, diag.kl,
          regret_window_count > 0 ? regret_window_sum / regret_window_count : 0.0});
      regret_window_sum = 0.0;
      regret_window_count = 0;
    }
  }
  return state;
}

EvalResult evaluate(const VariationalPosterior& posterior, const TrainConfig& cfg,
                    const TaskDistribution& dist, int episodes, EvalMode mode,
                    std::uint64_t eval_seed) {
  EvalResult result;
  result.trajectories.reserve(episodes);
  RandomStream root(eval_seed);
  const NetParams map = map_params(posterior);

  double regret_sum = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    RandomStream ep_rng = root.derive("eval_ep", static_cast<std::uint64_t>(ep));
    RandomStream task_rng = ep_rng.derive("task");
    const BanditTask task = sample_task(dist, task_rng);

    NetParams params;
    if (mode == EvalMode::kMap) {
      params = map;
    } else {
      RandomStream sample_rng = ep_rng.derive("weights");
      params = sample_params(posterior, sample_rng).params;
    }
    GreedyNetPolicy policy(std::move(params), cfg.reward_scale);
    RandomStream rollout_rng = ep_rng.derive("rollout");
    Trajectory traj = rollout(task, policy, dist.horizon, rollout_rng);
    regret_sum += episode_regret(traj);
    result.trajectories.push_back(std::move(traj));
  }
  result.mean_regret = episodes > 0 ? regret_sum / episodes : 0.0;
  return result;
}

double random_policy_regret(const TaskDistribution& dist) {
  // E[max(mu0, mu1) - (mu0 + mu1)/2] = E|mu0 - mu1| / 2, with the gap
  // ~ N(0, 2 sd^2), so E|gap| = 2 sd / sqrt(pi)
  return dist.horizon * dist.mean_prior_sd / std::sqrt(M_PI);
}

}  // namespace lrla
