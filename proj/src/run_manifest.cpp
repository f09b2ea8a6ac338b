// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/run_manifest.hpp"

#include "vaxstance/hashing.hpp"
#include "vaxstance/jsonl.hpp"
#include "vaxstance/timeutil.hpp"

#include <algorithm>
#include <chrono>

namespace vaxstance {

namespace fs = std::filesystem;

RunManifest::RunManifest(std::string command, std::vector<std::string> args, const json& config)
    : command_(std::move(command)),
      args_(std::move(args)),
      config_(config),
      config_hash_(sha256_hex(config.dump())),
      timestamp_(format_rfc3339(
          std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now()))) {}

json RunManifest::entry(const fs::path& path) const {
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string combined;
    for (const auto& f : files) {
      const auto h = sha256_file(f);
      combined += fs::relative(f, path).generic_string() + ":" + h + "\n";
    }
    return json{{"path", path.string()}, {"files", files.size()}, {"sha256", sha256_hex(combined)}};
  }
  if (!fs::exists(path)) return json{{"path", path.string()}, {"sha256", nullptr}};
  return json{{"path", path.string()}, {"sha256", sha256_file(path)}};
}

void RunManifest::add_input(const fs::path& path) { inputs_.push_back(entry(path)); }
void RunManifest::add_output(const fs::path& path) { outputs_.push_back(entry(path)); }
void RunManifest::set(const std::string& key, json value) { extra_[key] = std::move(value); }

json RunManifest::to_json() const {
  return json{{"command", command_},
              {"args", args_},
              {"tool_version", kToolVersion},
              {"config_sha256", config_hash_},
              {"config", config_},
              {"inputs", inputs_},
              {"outputs", outputs_},
              {"details", extra_},
              {"run_timestamp", timestamp_}};
}

void RunManifest::write(const fs::path& path) const { write_json_file(path, to_json()); }

}  // namespace vaxstance
