#pragma once

#include <string>

#include "lrla/bandit.hpp"
#include "lrla/trainer.hpp"
#include "lrla/varbayes.hpp"

namespace lrla {

struct Checkpoint {
  TrainConfig config;
  TaskDistribution dist;
  VariationalPosterior posterior;

  Checkpoint() : posterior(NetShape{}) {}
  Checkpoint(TrainConfig cfg, TaskDistribution d, VariationalPosterior post)
      : config(cfg), dist(d), posterior(std::move(post)) {}
};

// Self-describing binary container: magic, a JSON manifest (format version,
// config, grouping map, array names/shapes), then little-endian float64
// arrays in manifest order.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lrla
