// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace vaxstance {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance record written by every CLI command. Only `run_timestamp`
/// changes between identical runs.
class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> args, const json& config);

  /// Hashes the file now; directories hash every regular file beneath them
  /// in path order.
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void set(const std::string& key, json value);

  json to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  json entry(const std::filesystem::path& path) const;

  std::string command_;
  std::vector<std::string> args_;
  json config_;
  std::string config_hash_;
  json inputs_ = json::array();
  json outputs_ = json::array();
  json extra_ = json::object();
  std::string timestamp_;
};

}  // namespace vaxstance
