#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "lrla/bandit.hpp"
#include "lrla/belief.hpp"

namespace lrla {

struct ChoiceObservation {
  Factors factors;
  int choice = 0;  // arm index

  // regressors (V, RU, V/TU)
  Eigen::Vector3d regressors() const {
    return {factors.v, factors.ru, factors.v / factors.tu};
  }
};

struct ProbitFit {
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  double log_likelihood = 0.0;
  int n_obs = 0;
  bool converged = false;
  double ridge_used = 0.0;
};

// Replays an episode against the generative prior: belief updated with each
// realized (choice, reward), factors recorded before every choice.
std::vector<ChoiceObservation> extract_observations(
    const std::vector<std::pair<int, double>>& episode, const TaskDistribution& dist);
std::vector<ChoiceObservation> extract_observations(const Trajectory& traj,
                                                    const TaskDistribution& dist);

double probit_log_likelihood(const Eigen::Vector3d& w,
                             const std::vector<ChoiceObservation>& obs);

// Newton-fitted p(a=0) = Phi(w1 V + w2 RU + w3 V/TU) with a Gaussian ridge
// prior; covariance is the Laplace approximation at the optimum. Data that
// fail to converge are refit at ridge 0.1 and flagged.
ProbitFit fit_probit(const std::vector<ChoiceObservation>& obs, double ridge = 0.01);

Eigen::Vector3d coefficient_sd(const ProbitFit& fit);

}  // namespace lrla
