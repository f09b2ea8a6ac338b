// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/jsonl.hpp"

#include "vaxstance/error.hpp"

#include <fstream>
#include <sstream>

namespace vaxstance {

namespace fs = std::filesystem;

void for_each_jsonl(const fs::path& path,
                    const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw missing_input("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw validation_error(path.string() + ":" + std::to_string(line_no) +
                             ": malformed JSON: " + e.what());
    }
    if (!row.is_object()) {
      throw validation_error(path.string() + ":" + std::to_string(line_no) +
                             ": expected a JSON object");
    }
    try {
      fn(row, line_no);
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const json::exception& e) {
      throw validation_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
  std::ostringstream out;
  for (const auto& row : rows) out << row.dump() << '\n';
  write_text_file(path, out.str());
}

json read_json_file(const fs::path& path) {
  const std::string content = read_text_file(path);
  try {
    return json::parse(content);
  } catch (const json::exception& e) {
    throw validation_error(path.string() + ": malformed JSON: " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& value) {
  write_text_file(path, value.dump(2) + "\n");
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw missing_input("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kGeneric, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorKind::kGeneric, "write failed for " + path.string());
}

}  // namespace vaxstance
