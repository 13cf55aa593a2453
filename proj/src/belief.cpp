#include "lrla/belief.hpp"

#include <cmath>
#include <stdexcept>

namespace lrla {

double BeliefState::sd(int arm) const { return std::sqrt(posterior_var[arm]); }

const char* baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kValueDirected: return "value";
    case BaselineKind::kThompson: return "thompson";
    case BaselineKind::kUcb: return "ucb";
  }
  return "?";
}

BeliefState init_belief(const TaskDistribution& dist) {
  dist.validate();
  if (!(dist.mean_prior_sd > 0.0))
    throw std::invalid_argument("init_belief: prior sd must be > 0");
  if (!(dist.reward_noise_sd > 0.0))
    throw std::invalid_argument("init_belief: reward noise sd must be > 0");
  BeliefState belief;
  belief.posterior_mean.assign(dist.num_arms, dist.mean_prior_mu);
  belief.posterior_var.assign(dist.num_arms, dist.mean_prior_sd * dist.mean_prior_sd);
  belief.reward_noise_var = dist.reward_noise_sd * dist.reward_noise_sd;
  return belief;
}

BeliefState update_belief(const BeliefState& belief, int action, double reward) {
  if (action < 0 || action >= belief.num_arms())
    throw std::out_of_range("update_belief: action out of range");
  if (!std::isfinite(reward))
    throw std::invalid_argument("update_belief: reward must be finite");
  BeliefState next = belief;
  const double prior_var = belief.posterior_var[action];
  const double prior_mean = belief.posterior_mean[action];
  const double noise_var = belief.reward_noise_var;
  const double post_var = 1.0 / (1.0 / prior_var + 1.0 / noise_var);
  next.posterior_var[action] = post_var;
  next.posterior_mean[action] = post_var * (prior_mean / prior_var + reward / noise_var);
  return next;
}

Factors compute_factors(const BeliefState& belief) {
  if (belief.num_arms() != 2)
    throw std::invalid_argument("compute_factors: requires exactly two arms");
  const double sd0 = belief.sd(0);
  const double sd1 = belief.sd(1);
  Factors f;
  f.v = belief.posterior_mean[0] - belief.posterior_mean[1];
  f.ru = sd0 - sd1;
  f.tu = std::sqrt(sd0 * sd0 + sd1 * sd1);
  return f;
}

double phi(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double log_phi(double x) {
  if (x >= -10.0) return std::log(phi(x));
  // Left tail: log Phi(x) = -t^2/2 - log t - log(2*pi)/2 + log S(t), t = -x,
  // with the asymptotic series S = 1 - 1/t^2 + 3/t^4 - 15/t^6 + ...
  const double t = -x;
  const double inv_t2 = 1.0 / (t * t);
  double series = 1.0;
  double term = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -(2.0 * k - 1.0) * inv_t2;
    series += term;
    if (std::abs(term) < 1e-17 * series) break;
  }
  return -0.5 * t * t - std::log(t) - 0.5 * std::log(2.0 * M_PI) + std::log(series);
}

double baseline_choice_prob(BaselineKind kind, const Factors& factors) {
  switch (kind) {
    case BaselineKind::kValueDirected: return phi(factors.v);
    case BaselineKind::kThompson: return phi(factors.v / factors.tu);
    case BaselineKind::kUcb: return phi(factors.v + factors.ru);
  }
  throw std::logic_error("baseline_choice_prob: unknown kind");
}

BaselinePolicy::BaselinePolicy(BaselineKind kind, const TaskDistribution& dist)
    : kind_(kind), dist_(dist), belief_(init_belief(dist)) {}

void BaselinePolicy::reset() { belief_ = init_belief(dist_); }

int BaselinePolicy::choose(RandomStream& rng) {
  const double p_arm0 = baseline_choice_prob(kind_, compute_factors(belief_));
  return rng.bernoulli(p_arm0) ? 0 : 1;
}

void BaselinePolicy::observe(int action, double reward) {
  belief_ = update_belief(belief_, action, reward);
}

}  // namespace lrla
