#include "lrla/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lrla {

const std::vector<std::string> kCoefficientHeader = {
    "entity_id", "kind", "nhat", "seed", "w1",     "w2",
    "w3",        "sd1",  "sd2",  "sd3",  "loglik", "n_obs"};

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

void write_csv_file(const std::string& path, const CsvTable& table) {
  for (const auto& row : table.rows)
    if (row.size() != table.header.size())
      throw std::invalid_argument("write_csv_file: row width differs from header in " + path);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_csv_file: cannot open " + tmp);
    for (size_t i = 0; i < table.header.size(); ++i)
      out << (i ? "," : "") << table.header[i];
    out << "\n";
    for (const auto& row : table.rows) {
      for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << "\n";
    }
    if (!out) throw std::runtime_error("write_csv_file: write failed for " + tmp);
  }

  // self-validation: the written file must parse back under its own schema
  const CsvTable reread = read_csv_file(tmp);
  if (reread.header != table.header || reread.rows.size() != table.rows.size()) {
    std::remove(tmp.c_str());
    throw std::runtime_error("write_csv_file: self-validation failed for " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("write_csv_file: rename failed for " + path);
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv_file: cannot open " + path);
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = split_line(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != table.header.size())
        throw std::runtime_error("read_csv_file: ragged row in " + path);
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

CsvTable trajectories_to_csv(const std::vector<Trajectory>& trajectories,
                             std::uint64_t seed) {
  CsvTable table;
  table.header = {"source_tag", "seed", "episode", "trial", "action",
                  "reward",     "mu0",  "mu1",     "q0",    "q1"};
  const std::string seed_str = std::to_string(seed);
  for (size_t ep = 0; ep < trajectories.size(); ++ep) {
    const Trajectory& traj = trajectories[ep];
    for (const StepRecord& s : traj.steps) {
      std::vector<std::string> row;
      row.reserve(10);
      row.push_back(traj.source_tag);
      row.push_back(seed_str);
      row.push_back(std::to_string(ep));
      row.push_back(std::to_string(s.step_index));
      row.push_back(std::to_string(s.action));
      row.push_back(format_double(s.reward));
      row.push_back(format_double(traj.task.arm_means.at(0)));
      row.push_back(format_double(traj.task.arm_means.at(1)));
      if (s.q_values && s.q_values->size() == 2) {
        row.push_back(format_double((*s.q_values)[0]));
        row.push_back(format_double((*s.q_values)[1]));
      } else {
        row.emplace_back();
        row.emplace_back();
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::map<std::string, std::vector<std::vector<std::pair<int, double>>>>
episodes_from_trajectory_csv(const CsvTable& table) {
  const std::vector<std::string> expected = {"source_tag", "seed", "episode", "trial",
                                             "action",     "reward"};
  if (table.header.size() < expected.size())
    throw std::runtime_error("trajectory csv: missing columns");
  for (size_t i = 0; i < expected.size(); ++i)
    if (table.header[i] != expected[i])
      throw std::runtime_error("trajectory csv: unexpected column " + table.header[i]);

  // (tag, seed, episode) -> trial -> (action, reward)
  std::map<std::string, std::map<std::pair<long long, long>, std::map<long, std::pair<int, double>>>>
      grouped;
  for (const auto& row : table.rows) {
    const std::string& tag = row[0];
    const long long seed = std::stoll(row[1]);
    const long episode = std::stol(row[2]);
    const long trial = std::stol(row[3]);
    const int action = std::stoi(row[4]);
    const double reward = std::stod(row[5]);
    grouped[tag][{seed, episode}][trial] = {action, reward};
  }

  std::map<std::string, std::vector<std::vector<std::pair<int, double>>>> result;
  for (const auto& [tag, episodes] : grouped) {
    for (const auto& [key, trials] : episodes) {
      std::vector<std::pair<int, double>> episode;
      episode.reserve(trials.size());
      for (const auto& [trial, step] : trials) episode.push_back(step);
      result[tag].push_back(std::move(episode));
    }
  }
  return result;
}

}  // namespace lrla
