#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace lrla {

std::uint64_t fnv1a64_file(const std::string& path);

// manifest.json for one command invocation: format version, command name,
// resolved config, and the produced files with sizes and content hashes.
// File entries are sorted by name so reruns are byte-comparable.
void write_run_manifest(const std::string& output_dir, const std::string& command,
                        const nlohmann::json& config_echo,
                        const std::vector<std::string>& produced_files,
                        const nlohmann::json& extra = nlohmann::json::object());

}  // namespace lrla
