#include "lrla/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lrla {

void ExperimentConfig::validate() const {
  task.validate();
  train.validate();
  if (!(analysis.ridge >= 0.0)) throw std::invalid_argument("config: ridge must be >= 0");
  if (!(analysis.bandwidth >= 0.0)) throw std::invalid_argument("config: bandwidth must be >= 0");
  if (analysis.sim_episodes < 1)
    throw std::invalid_argument("config: sim_episodes must be >= 1");
  if (nhat_grid.empty()) throw std::invalid_argument("config: nhat grid must be non-empty");
  for (int nhat : nhat_grid)
    if (nhat < 0) throw std::invalid_argument("config: nhat values must be >= 0");
  if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
  if (output_dir.empty()) throw std::invalid_argument("config: output dir must be non-empty");
}

namespace {

[[noreturn]] void fail(long line, const std::string& message) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + message);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& value, long line) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) fail(line, "trailing characters in number '" + value + "'");
    return v;
  } catch (const std::runtime_error&) {
    throw;
  } catch (...) {
    fail(line, "expected a number, got '" + value + "'");
  }
}

long to_long(const std::string& value, long line) {
  try {
    size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) fail(line, "trailing characters in integer '" + value + "'");
    return v;
  } catch (const std::runtime_error&) {
    throw;
  } catch (...) {
    fail(line, "expected an integer, got '" + value + "'");
  }
}

template <typename T>
std::vector<T> to_list(const std::string& value, long line) {
  std::vector<T> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(line, "empty list element");
    items.push_back(static_cast<T>(to_long(item, line)));
  }
  if (items.empty()) fail(line, "empty list");
  return items;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  long line_number = 0;

  while (std::getline(in, raw)) {
    ++line_number;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_number, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "task" && section != "train" && section != "analysis" &&
          section != "grid" && section != "output")
        fail(line_number, "unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_number, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail(line_number, "empty key or value");
    if (section.empty()) fail(line_number, "key outside any section");

    if (section == "task") {
      if (key == "mean_prior_mu") config.task.mean_prior_mu = to_double(value, line_number);
      else if (key == "mean_prior_sd") config.task.mean_prior_sd = to_double(value, line_number);
      else if (key == "reward_noise_sd") config.task.reward_noise_sd = to_double(value, line_number);
      else if (key == "horizon") config.task.horizon = static_cast<int>(to_long(value, line_number));
      else if (key == "num_arms") config.task.num_arms = static_cast<int>(to_long(value, line_number));
      else fail(line_number, "unknown key '" + key + "' in [task]");
    } else if (section == "train") {
      if (key == "nhat") config.train.nhat = static_cast<int>(to_long(value, line_number));
      else if (key == "sigma_y") config.train.sigma_y = to_double(value, line_number);
      else if (key == "n_step") config.train.n_step = static_cast<int>(to_long(value, line_number));
      else if (key == "gamma") config.train.gamma = to_double(value, line_number);
      else if (key == "parallel_envs") config.train.parallel_envs = static_cast<int>(to_long(value, line_number));
      else if (key == "episodes_total") config.train.episodes_total = static_cast<int>(to_long(value, line_number));
      else if (key == "learning_rate") config.train.learning_rate = to_double(value, line_number);
      else if (key == "adam_beta1") config.train.adam_beta1 = to_double(value, line_number);
      else if (key == "adam_beta2") config.train.adam_beta2 = to_double(value, line_number);
      else if (key == "adam_eps") config.train.adam_eps = to_double(value, line_number);
      else if (key == "target_sync_every") config.train.target_sync_every = static_cast<int>(to_long(value, line_number));
      else if (key == "seed") config.train.seed = static_cast<std::uint64_t>(to_long(value, line_number));
      else if (key == "hidden_dim") config.train.hidden_dim = static_cast<int>(to_long(value, line_number));
      else if (key == "reward_scale") config.train.reward_scale = to_double(value, line_number);
      else if (key == "tau0") config.train.tau0 = to_double(value, line_number);
      else fail(line_number, "unknown key '" + key + "' in [train]");
    } else if (section == "analysis") {
      if (key == "ridge") config.analysis.ridge = to_double(value, line_number);
      else if (key == "bandwidth") config.analysis.bandwidth = to_double(value, line_number);
      else if (key == "sim_episodes") config.analysis.sim_episodes = static_cast<int>(to_long(value, line_number));
      else fail(line_number, "unknown key '" + key + "' in [analysis]");
    } else if (section == "grid") {
      if (key == "nhat") config.nhat_grid = to_list<int>(value, line_number);
      else if (key == "seeds") config.seeds = to_list<std::uint64_t>(value, line_number);
      else fail(line_number, "unknown key '" + key + "' in [grid]");
    } else {  // output
      if (key == "dir") config.output_dir = value;
      else fail(line_number, "unknown key '" + key + "' in [output]");
    }
  }
  config.validate();
  return config;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

nlohmann::json experiment_config_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["task"] = {{"mean_prior_mu", config.task.mean_prior_mu},
               {"mean_prior_sd", config.task.mean_prior_sd},
               {"reward_noise_sd", config.task.reward_noise_sd},
               {"horizon", config.task.horizon},
               {"num_arms", config.task.num_arms}};
  j["train"] = {{"nhat", config.train.nhat},
                {"sigma_y", config.train.sigma_y},
                {"n_step", config.train.n_step},
                {"gamma", config.train.gamma},
                {"parallel_envs", config.train.parallel_envs},
                {"episodes_total", config.train.episodes_total},
                {"learning_rate", config.train.learning_rate},
                {"adam_beta1", config.train.adam_beta1},
                {"adam_beta2", config.train.adam_beta2},
                {"adam_eps", config.train.adam_eps},
                {"target_sync_every", config.train.target_sync_every},
                {"seed", config.train.seed},
                {"hidden_dim", config.train.hidden_dim},
                {"reward_scale", config.train.reward_scale},
                {"tau0", config.train.tau0}};
  j["analysis"] = {{"ridge", config.analysis.ridge},
                   {"bandwidth", config.analysis.bandwidth},
                   {"sim_episodes", config.analysis.sim_episodes}};
  j["grid"] = {{"nhat", config.nhat_grid}, {"seeds", config.seeds}};
  j["output"] = {{"dir", config.output_dir}};
  return j;
}

}  // namespace lrla
