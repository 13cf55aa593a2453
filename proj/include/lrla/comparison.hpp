#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "lrla/bandit.hpp"
#include "lrla/probit.hpp"
#include "lrla/trainer.hpp"

namespace lrla {

// One participant's raw choice data: episodes of (choice, reward) trials.
struct ParticipantData {
  int id = 0;
  std::vector<std::vector<std::pair<int, double>>> episodes;

  int total_trials() const;
};

// A choice model under comparison. LRLA hypotheses carry one probit
// coefficient vector per trained seed; fixed baselines carry exactly one.
struct Hypothesis {
  std::string label;
  std::vector<Eigen::Vector3d> members;
};

Hypothesis value_directed_hypothesis();
Hypothesis thompson_hypothesis();
Hypothesis ucb_hypothesis();

// Probit surrogate for a trained model: simulate greedy episodes in
// posterior-sample mode and fit the Eq.-style regression to them. The
// deterministic argmax policy itself assigns zero likelihood to any deviating
// choice, so the smoothed surrogate is what enters the comparison.
struct ModelSurrogate {
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  ProbitFit fit;
  bool degenerate = false;  // simulation chose a single arm throughout
};

ModelSurrogate hypothesis_from_model(const VariationalPosterior& posterior,
                                     const TrainConfig& cfg, const TaskDistribution& dist,
                                     int sim_episodes, std::uint64_t sim_seed,
                                     double ridge = 0.01);

// log p(D | w): sum over all trials of log Phi(+-(w . x_t)), with factors
// from the participant's own belief trajectory.
double participant_loglik(const ParticipantData& participant, const Eigen::Vector3d& w,
                          const TaskDistribution& dist);

// log of the uniform mixture over members (log-mean-exp).
double marginal_loglik(const ParticipantData& participant, const Hypothesis& hypothesis,
                       const TaskDistribution& dist);

struct BayesFactorResult {
  double log_bf = 0.0;
  double two_log_bf = 0.0;
  std::string best_hypothesis;  // class member with the highest marginal
};

// log BF_i = log-mean-exp over class hypotheses - baseline log-likelihood.
BayesFactorResult bayes_factor(const ParticipantData& participant,
                               const std::vector<Hypothesis>& class_hyps,
                               const Hypothesis& baseline, const TaskDistribution& dist);

// 2 * (sum_i class marginal - sum_i fixed loglik) over the population.
double population_bf(const std::vector<ParticipantData>& participants,
                     const std::vector<Hypothesis>& class_hyps, const Hypothesis& fixed,
                     const TaskDistribution& dist);

struct LoadDiagnostic {
  long line = 0;
  std::string message;
};

struct HumanDataset {
  std::vector<ParticipantData> participants;
  std::vector<LoadDiagnostic> diagnostics;
};

// CSV schema: participant_id:int, episode:int, trial:int, choice:int{0,1},
// reward:float; optional extra columns are ignored. Malformed rows and
// episodes whose trial count differs from the horizon are rejected with
// per-row diagnostics.
HumanDataset load_human_data(std::istream& in, const TaskDistribution& dist);
HumanDataset load_human_data(const std::string& path, const TaskDistribution& dist);

double log_mean_exp(const std::vector<double>& values);

}  // namespace lrla
