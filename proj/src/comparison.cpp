#include "lrla/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lrla {

int ParticipantData::total_trials() const {
  int total = 0;
  for (const auto& ep : episodes) total += static_cast<int>(ep.size());
  return total;
}

Hypothesis value_directed_hypothesis() { return {"value", {Eigen::Vector3d{1, 0, 0}}}; }
Hypothesis thompson_hypothesis() { return {"thompson", {Eigen::Vector3d{0, 0, 1}}}; }
Hypothesis ucb_hypothesis() { return {"ucb", {Eigen::Vector3d{1, 1, 0}}}; }

ModelSurrogate hypothesis_from_model(const VariationalPosterior& posterior,
                                     const TrainConfig& cfg, const TaskDistribution& dist,
                                     int sim_episodes, std::uint64_t sim_seed, double ridge) {
  if (sim_episodes < 1)
    throw std::invalid_argument("hypothesis_from_model: sim_episodes must be >= 1");
  const EvalResult sim =
      evaluate(posterior, cfg, dist, sim_episodes, EvalMode::kPosteriorSample, sim_seed);

  std::vector<ChoiceObservation> obs;
  obs.reserve(static_cast<size_t>(sim_episodes) * dist.horizon);
  bool arm_seen[2] = {false, false};
  for (const Trajectory& traj : sim.trajectories) {
    const std::vector<ChoiceObservation> episode_obs = extract_observations(traj, dist);
    for (const ChoiceObservation& o : episode_obs) arm_seen[o.choice] = true;
    obs.insert(obs.end(), episode_obs.begin(), episode_obs.end());
  }

  ModelSurrogate surrogate;
  surrogate.degenerate = !(arm_seen[0] && arm_seen[1]);
  surrogate.fit = fit_probit(obs, ridge);
  surrogate.w = surrogate.fit.w;
  return surrogate;
}

double participant_loglik(const ParticipantData& participant, const Eigen::Vector3d& w,
                          const TaskDistribution& dist) {
  double ll = 0.0;
  for (const auto& episode : participant.episodes) {
    const std::vector<ChoiceObservation> obs = extract_observations(episode, dist);
    ll += probit_log_likelihood(w, obs);
  }
  if (!std::isfinite(ll)) throw std::runtime_error("participant_loglik: non-finite result");
  return ll;
}

double log_mean_exp(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("log_mean_exp: empty input");
  const double max_value = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(max_value)) return max_value;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max_value);
  return max_value + std::log(sum / values.size());
}

double marginal_loglik(const ParticipantData& participant, const Hypothesis& hypothesis,
                       const TaskDistribution& dist) {
  if (hypothesis.members.empty())
    throw std::invalid_argument("marginal_loglik: hypothesis has no members");
  std::vector<double> logliks;
  logliks.reserve(hypothesis.members.size());
  for (const Eigen::Vector3d& w : hypothesis.members)
    logliks.push_back(participant_loglik(participant, w, dist));
  return log_mean_exp(logliks);
}

BayesFactorResult bayes_factor(const ParticipantData& participant,
                               const std::vector<Hypothesis>& class_hyps,
                               const Hypothesis& baseline, const TaskDistribution& dist) {
  if (class_hyps.empty()) throw std::invalid_argument("bayes_factor: empty hypothesis class");
  std::vector<double> marginals;
  marginals.reserve(class_hyps.size());
  size_t best = 0;
  for (size_t i = 0; i < class_hyps.size(); ++i) {
    marginals.push_back(marginal_loglik(participant, class_hyps[i], dist));
    if (marginals[i] > marginals[best]) best = i;
  }
  BayesFactorResult result;
  result.log_bf =
      log_mean_exp(marginals) - marginal_loglik(participant, baseline, dist);
  result.two_log_bf = 2.0 * result.log_bf;
  result.best_hypothesis = class_hyps[best].label;
  return result;
}

double population_bf(const std::vector<ParticipantData>& participants,
                     const std::vector<Hypothesis>& class_hyps, const Hypothesis& fixed,
                     const TaskDistribution& dist) {
  double class_total = 0.0;
  double fixed_total = 0.0;
  for (const ParticipantData& p : participants) {
    std::vector<double> marginals;
    marginals.reserve(class_hyps.size());
    for (const Hypothesis& h : class_hyps) marginals.push_back(marginal_loglik(p, h, dist));
    class_total += log_mean_exp(marginals);
    fixed_total += marginal_loglik(p, fixed, dist);
  }
  return 2.0 * (class_total - fixed_total);
}

namespace {

bool parse_long(const std::string& field, long& out) {
  try {
    size_t pos = 0;
    out = std::stol(field, &pos);
    return pos == field.size();
  } catch (...) {
    return false;
  }
}

bool parse_double(const std::string& field, double& out) {
  try {
    size_t pos = 0;
    out = std::stod(field, &pos);
    return pos == field.size();
  } catch (...) {
    return false;
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? std::string()
                                                : field.substr(first, last - first + 1));
  }
  return fields;
}

}  // namespace

HumanDataset load_human_data(std::istream& in, const TaskDistribution& dist) {
  dist.validate();
  HumanDataset dataset;

  struct TrialRow {
    long trial;
    int choice;
    double reward;
    long line;
  };
  // participant -> episode -> trials
  std::map<long, std::map<long, std::vector<TrialRow>>> table;

  std::string line;
  long line_number = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> fields = split_csv_line(line);

    if (first_content_line) {
      first_content_line = false;
      long probe;
      if (!fields.empty() && !parse_long(fields[0], probe)) continue;  // header row
    }
    if (fields.size() < 5) {
      dataset.diagnostics.push_back({line_number, "expected at least 5 columns"});
      continue;
    }
    long participant, episode, trial;
    double reward;
    long choice_raw;
    if (!parse_long(fields[0], participant) || !parse_long(fields[1], episode) ||
        !parse_long(fields[2], trial)) {
      dataset.diagnostics.push_back({line_number, "malformed id columns"});
      continue;
    }
    if (!parse_long(fields[3], choice_raw) || choice_raw < 0 || choice_raw >= dist.num_arms) {
      dataset.diagnostics.push_back({line_number, "choice out of range"});
      continue;
    }
    if (!parse_double(fields[4], reward) || !std::isfinite(reward)) {
      dataset.diagnostics.push_back({line_number, "missing or non-finite reward"});
      continue;
    }
    table[participant][episode].push_back(
        {trial, static_cast<int>(choice_raw), reward, line_number});
  }

  for (auto& [participant_id, episodes] : table) {
    ParticipantData participant;
    participant.id = static_cast<int>(participant_id);
    for (auto& [episode_id, trials] : episodes) {
      if (static_cast<int>(trials.size()) != dist.horizon) {
        dataset.diagnostics.push_back(
            {trials.front().line, "participant " + std::to_string(participant_id) +
                                      " episode " + std::to_string(episode_id) + " has " +
                                      std::to_string(trials.size()) + " trials, expected " +
                                      std::to_string(dist.horizon)});
        continue;
      }
      std::sort(trials.begin(), trials.end(),
                [](const TrialRow& a, const TrialRow& b) { return a.trial < b.trial; });
      std::vector<std::pair<int, double>> episode;
      episode.reserve(trials.size());
      for (const TrialRow& t : trials) episode.emplace_back(t.choice, t.reward);
      participant.episodes.push_back(std::move(episode));
    }
    if (!participant.episodes.empty()) dataset.participants.push_back(std::move(participant));
  }
  return dataset;
}

HumanDataset load_human_data(const std::string& path, const TaskDistribution& dist) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_human_data: cannot open " + path);
  return load_human_data(in, dist);
}

}  // namespace lrla
