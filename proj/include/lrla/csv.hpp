#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lrla/bandit.hpp"

namespace lrla {

// shortest round-trip decimal representation
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Atomic write (tmp + rename) followed by a reparse of the file against the
// header's column count.
void write_csv_file(const std::string& path, const CsvTable& table);

CsvTable read_csv_file(const std::string& path);

// Trajectory export schema:
// source_tag, seed, episode, trial, action, reward, mu0, mu1, q0, q1
// (q columns empty for policies without Q-values).
CsvTable trajectories_to_csv(const std::vector<Trajectory>& trajectories,
                             std::uint64_t seed);

// Episodes of (action, reward) grouped by source_tag, in (seed, episode) order.
std::map<std::string, std::vector<std::vector<std::pair<int, double>>>>
episodes_from_trajectory_csv(const CsvTable& table);

// Coefficient export schema:
// entity_id, kind, nhat_or_blank, seed_or_blank, w1, w2, w3, sd1, sd2, sd3,
// loglik, n_obs
extern const std::vector<std::string> kCoefficientHeader;

}  // namespace lrla
