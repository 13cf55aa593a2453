#include "lrla/bandit.hpp"

#include <algorithm>
#include <stdexcept>

namespace lrla {

void TaskDistribution::validate() const {
  if (!(mean_prior_sd >= 0.0) || !std::isfinite(mean_prior_sd))
    throw std::invalid_argument("TaskDistribution: mean_prior_sd must be finite and >= 0");
  if (!(reward_noise_sd >= 0.0) || !std::isfinite(reward_noise_sd))
    throw std::invalid_argument("TaskDistribution: reward_noise_sd must be finite and >= 0");
  if (horizon < 1) throw std::invalid_argument("TaskDistribution: horizon must be >= 1");
  if (num_arms < 1) throw std::invalid_argument("TaskDistribution: num_arms must be >= 1");
}

double BanditTask::best_mean() const {
  return *std::max_element(arm_means.begin(), arm_means.end());
}

double Trajectory::total_reward() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.reward;
  return total;
}

BanditTask sample_task(const TaskDistribution& dist, RandomStream& rng) {
  dist.validate();
  BanditTask task;
  task.reward_noise_sd = dist.reward_noise_sd;
  task.arm_means.resize(dist.num_arms);
  for (auto& mean : task.arm_means)
    mean = rng.normal(dist.mean_prior_mu, dist.mean_prior_sd);
  return task;
}

double step(const BanditTask& task, int action, RandomStream& rng) {
  if (action < 0 || action >= task.num_arms())
    throw std::out_of_range("step: action out of range");
  return rng.normal(task.arm_means[action], task.reward_noise_sd);
}

Trajectory rollout(const BanditTask& task, ActionChooser& policy, int horizon,
                   RandomStream& rng) {
  if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
  RandomStream policy_rng = rng.derive("policy");
  RandomStream reward_rng = rng.derive("reward");

  Trajectory traj;
  traj.task = task;
  traj.steps.reserve(horizon);
  policy.reset();
  for (int t = 0; t < horizon; ++t) {
    const int action = policy.choose(policy_rng);
    if (action < 0 || action >= task.num_arms())
      throw std::out_of_range("rollout: policy chose an invalid arm");
    const double reward = step(task, action, reward_rng);
    StepRecord rec;
    rec.step_index = t;
    rec.action = action;
    rec.reward = reward;
    if (const std::vector<double>* q = policy.last_q()) rec.q_values = *q;
    traj.steps.push_back(std::move(rec));
    policy.observe(action, reward);
  }
  return traj;
}

double episode_regret(const Trajectory& traj) {
  const double best = traj.task.best_mean();
  double regret = 0.0;
  for (const auto& s : traj.steps) regret += best - traj.task.arm_means[s.action];
  return regret;
}

}  // namespace lrla
