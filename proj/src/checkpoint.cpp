#include "lrla/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace lrla {

namespace {

constexpr char kMagic[8] = {'L', 'R', 'L', 'A', 'C', 'K', 'P', '1'};
constexpr int kFormatVersion = 1;

using json = nlohmann::json;

json config_json(const TrainConfig& cfg) {
  return json{{"nhat", cfg.nhat},
              {"sigma_y", cfg.sigma_y},
              {"n_step", cfg.n_step},
              {"gamma", cfg.gamma},
              {"parallel_envs", cfg.parallel_envs},
              {"episodes_total", cfg.episodes_total},
              {"learning_rate", cfg.learning_rate},
              {"adam_beta1", cfg.adam_beta1},
              {"adam_beta2", cfg.adam_beta2},
              {"adam_eps", cfg.adam_eps},
              {"target_sync_every", cfg.target_sync_every},
              {"seed", cfg.seed},
              {"hidden_dim", cfg.hidden_dim},
              {"reward_scale", cfg.reward_scale},
              {"tau0", cfg.tau0}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.nhat = j.at("nhat").get<int>();
  cfg.sigma_y = j.at("sigma_y").get<double>();
  cfg.n_step = j.at("n_step").get<int>();
  cfg.gamma = j.at("gamma").get<double>();
  cfg.parallel_envs = j.at("parallel_envs").get<int>();
  cfg.episodes_total = j.at("episodes_total").get<int>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.adam_beta1 = j.at("adam_beta1").get<double>();
  cfg.adam_beta2 = j.at("adam_beta2").get<double>();
  cfg.adam_eps = j.at("adam_eps").get<double>();
  cfg.target_sync_every = j.at("target_sync_every").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.hidden_dim = j.at("hidden_dim").get<int>();
  cfg.reward_scale = j.at("reward_scale").get<double>();
  cfg.tau0 = j.at("tau0").get<double>();
  return cfg;
}

json task_json(const TaskDistribution& dist) {
  return json{{"mean_prior_mu", dist.mean_prior_mu},
              {"mean_prior_sd", dist.mean_prior_sd},
              {"reward_noise_sd", dist.reward_noise_sd},
              {"horizon", dist.horizon},
              {"num_arms", dist.num_arms}};
}

TaskDistribution task_from_json(const json& j) {
  TaskDistribution dist;
  dist.mean_prior_mu = j.at("mean_prior_mu").get<double>();
  dist.mean_prior_sd = j.at("mean_prior_sd").get<double>();
  dist.reward_noise_sd = j.at("reward_noise_sd").get<double>();
  dist.horizon = j.at("horizon").get<int>();
  dist.num_arms = j.at("num_arms").get<int>();
  return dist;
}

struct ArrayRef {
  const char* name;
  Eigen::VectorXd* data;
};

std::vector<ArrayRef> posterior_arrays(PosteriorVec& phi) {
  return {{"theta_loc", &phi.theta_loc},
          {"theta_log_scale", &phi.theta_log_scale},
          {"group_loc", &phi.group_loc},
          {"group_log_scale", &phi.group_log_scale},
          {"scale_loc", &phi.scale_loc},
          {"scale_log_scale", &phi.scale_log_scale}};
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  const VariationalPosterior& q = checkpoint.posterior;
  PosteriorVec phi_copy = q.phi;  // array directory wants mutable refs
  const ParamLayout& layout = q.layout;

  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["config"] = config_json(checkpoint.config);
  manifest["task"] = task_json(checkpoint.dist);
  manifest["shape"] = {{"input_dim", q.shape.input_dim},
                       {"hidden_dim", q.shape.hidden_dim},
                       {"output_dim", q.shape.output_dim}};

  std::vector<int> group_of(layout.num_weights());
  for (int k = 0; k < layout.num_weights(); ++k) group_of[k] = layout.group_of(k);
  std::vector<int> layer_of_group(layout.num_groups());
  for (int g = 0; g < layout.num_groups(); ++g) layer_of_group[g] = layout.layer_of_group(g);
  manifest["grouping"] = {{"group_of_weight", group_of}, {"layer_of_group", layer_of_group}};

  json arrays = json::array();
  for (const ArrayRef& ref : posterior_arrays(phi_copy))
    arrays.push_back({{"name", ref.name}, {"length", ref.data->size()}});
  manifest["arrays"] = arrays;

  const std::string manifest_text = manifest.dump();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + tmp);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = manifest_text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(manifest_text.data(), static_cast<std::streamsize>(manifest_text.size()));
    for (const ArrayRef& ref : posterior_arrays(phi_copy))
      out.write(reinterpret_cast<const char*>(ref.data->data()),
                static_cast<std::streamsize>(ref.data->size() * sizeof(double)));
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("save_checkpoint: rename failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string manifest_text(len, '\0');
  in.read(manifest_text.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("load_checkpoint: truncated manifest in " + path);

  const json manifest = json::parse(manifest_text);
  if (manifest.at("format_version").get<int>() != kFormatVersion)
    throw std::runtime_error("load_checkpoint: unsupported format version");

  NetShape shape;
  shape.input_dim = manifest.at("shape").at("input_dim").get<int>();
  shape.hidden_dim = manifest.at("shape").at("hidden_dim").get<int>();
  shape.output_dim = manifest.at("shape").at("output_dim").get<int>();

  Checkpoint checkpoint(config_from_json(manifest.at("config")),
                        task_from_json(manifest.at("task")), VariationalPosterior(shape));
  checkpoint.posterior.phi.setZero(checkpoint.posterior.layout);

  // the stored grouping must match the layout this build derives
  const auto group_of = manifest.at("grouping").at("group_of_weight").get<std::vector<int>>();
  const ParamLayout& layout = checkpoint.posterior.layout;
  if (static_cast<int>(group_of.size()) != layout.num_weights())
    throw std::runtime_error("load_checkpoint: grouping size mismatch");
  for (int k = 0; k < layout.num_weights(); ++k)
    if (group_of[k] != layout.group_of(k))
      throw std::runtime_error("load_checkpoint: grouping map mismatch");

  for (const ArrayRef& ref : posterior_arrays(checkpoint.posterior.phi)) {
    bool found = false;
    for (const auto& entry : manifest.at("arrays")) {
      if (entry.at("name").get<std::string>() != ref.name) continue;
      found = true;
      if (entry.at("length").get<long>() != ref.data->size())
        throw std::runtime_error(std::string("load_checkpoint: length mismatch for ") + ref.name);
    }
    if (!found)
      throw std::runtime_error(std::string("load_checkpoint: missing array ") + ref.name);
    in.read(reinterpret_cast<char*>(ref.data->data()),
            static_cast<std::streamsize>(ref.data->size() * sizeof(double)));
  }
  if (!in) throw std::runtime_error("load_checkpoint: truncated arrays in " + path);
  return checkpoint;
}

}  // namespace lrla
