// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace vaxstance {

using json = nlohmann::ordered_json;

/// Calls `fn(object, line_number)` for each non-blank line of a JSONL file.
/// Parse failures and exceptions thrown by `fn` are rethrown as validation
/// errors prefixed with "file:line". A missing file is a missing-input error.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&, std::size_t)>& fn);

/// Writes one compact JSON object per line (trailing newline included).
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);

json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with two-space indent and a trailing newline.
void write_json_file(const std::filesystem::path& path, const json& value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace vaxstance
