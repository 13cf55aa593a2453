#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lrla/factors.hpp"
#include "lrla/rng.hpp"

namespace lrla {

// Generative family of two-armed Gaussian bandits: arm means drawn from
// N(mean_prior_mu, mean_prior_sd^2), rewards from N(mu_a, reward_noise_sd^2).
struct TaskDistribution {
  double mean_prior_mu = 0.0;
  double mean_prior_sd = 10.0;
  double reward_noise_sd = std::sqrt(10.0);
  int horizon = 10;
  int num_arms = 2;

  void validate() const;
};

struct BanditTask {
  std::vector<double> arm_means;
  double reward_noise_sd = 0.0;

  int num_arms() const { return static_cast<int>(arm_means.size()); }
  double best_mean() const;
};

struct StepRecord {
  int step_index = 0;
  int action = 0;
  double reward = 0.0;
  std::optional<std::vector<double>> q_values;
  std::optional<Factors> belief_factors;
};

struct Trajectory {
  BanditTask task;
  std::vector<StepRecord> steps;
  std::string source_tag;

  double total_reward() const;
};

// Stateful episode policy. rollout() calls reset() once, then alternates
// choose()/observe() for each trial, so the policy sees the full history
// before every choice.
class ActionChooser {
 public:
  virtual ~ActionChooser() = default;
  virtual void reset() = 0;
  virtual int choose(RandomStream& rng) = 0;
  virtual void observe(int action, double reward) = 0;
  // Q-values backing the most recent choose(), when the policy has them.
  virtual const std::vector<double>* last_q() const { return nullptr; }
};

BanditTask sample_task(const TaskDistribution& dist, RandomStream& rng);

// One pull; reward ~ N(arm_means[action], reward_noise_sd^2).
double step(const BanditTask& task, int action, RandomStream& rng);

Trajectory rollout(const BanditTask& task, ActionChooser& policy, int horizon,
                   RandomStream& rng);

// Pseudo-regret on latent means: sum_t (max_a mu_a - mu_{a_t}).
double episode_regret(const Trajectory& traj);

}  // namespace lrla
