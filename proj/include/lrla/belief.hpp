#pragma once

#include <vector>

#include "lrla/bandit.hpp"
#include "lrla/factors.hpp"

namespace lrla {

// Independent conjugate-Gaussian posterior over each arm's latent mean,
// with known reward-noise variance.
struct BeliefState {
  std::vector<double> posterior_mean;
  std::vector<double> posterior_var;
  double reward_noise_var = 0.0;

  int num_arms() const { return static_cast<int>(posterior_mean.size()); }
  double sd(int arm) const;
};

enum class BaselineKind { kValueDirected, kThompson, kUcb };

const char* baseline_name(BaselineKind kind);

BeliefState init_belief(const TaskDistribution& dist);

// Conjugate normal-normal update of the observed arm; the other arm is
// untouched.
BeliefState update_belief(const BeliefState& belief, int action, double reward);

Factors compute_factors(const BeliefState& belief);

// Standard normal CDF via erfc.
double phi(double x);

// log Phi, stable deep into the left tail (asymptotic series below x = -10).
double log_phi(double x);

// Probability of choosing arm 0: Phi(V), Phi(V/TU), or Phi(V + RU).
double baseline_choice_prob(BaselineKind kind, const Factors& factors);

// Belief-tracking policy that samples arm 0 with baseline_choice_prob.
class BaselinePolicy : public ActionChooser {
 public:
  BaselinePolicy(BaselineKind kind, const TaskDistribution& dist);

  void reset() override;
  int choose(RandomStream& rng) override;
  void observe(int action, double reward) override;

 private:
  BaselineKind kind_;
  TaskDistribution dist_;
  BeliefState belief_;
};

}  // namespace lrla
