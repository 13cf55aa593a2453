#include "lrla/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace lrla {

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("fnv1a64_file: cannot open " + path);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buffer[1 << 16];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ull;
    }
    if (got < static_cast<std::streamsize>(sizeof(buffer))) break;
  }
  return hash;
}

void write_run_manifest(const std::string& output_dir, const std::string& command,
                        const nlohmann::json& config_echo,
                        const std::vector<std::string>& produced_files,
                        const nlohmann::json& extra) {
  namespace fs = std::filesystem;
  std::vector<std::string> files = produced_files;
  std::sort(files.begin(), files.end());

  nlohmann::json manifest;
  manifest["format_version"] = 1;
  manifest["command"] = command;
  manifest["config"] = config_echo;
  if (!extra.empty()) manifest["extra"] = extra;
  nlohmann::json entries = nlohmann::json::array();
  for (const std::string& name : files) {
    const fs::path full = fs::path(output_dir) / name;
    char hash_hex[17];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64_file(full.string())));
    entries.push_back({{"name", name},
                       {"bytes", static_cast<std::uint64_t>(fs::file_size(full))},
                       {"fnv1a64", hash_hex}});
  }
  manifest["files"] = entries;

  const fs::path path = fs::path(output_dir) / "manifest.json";
  const std::string tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_run_manifest: cannot open " + tmp);
    out << manifest.dump(2) << "\n";
  }
  if (std::rename(tmp.c_str(), path.string().c_str()) != 0)
    throw std::runtime_error("write_run_manifest: rename failed for " + path.string());
}

}  // namespace lrla
