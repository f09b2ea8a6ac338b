// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/lexicon.hpp"

#include "vaxstance/error.hpp"
#include "vaxstance/jsonl.hpp"
#include "vaxstance/text.hpp"

#include <map>
#include <unordered_set>

namespace vaxstance {

VaccineLexicon parse_lexicon(std::string_view json_text) {
  std::unordered_set<std::string> seen_keys;
  std::string duplicate;
  // The parser keeps only one value per key, so duplicates are caught here.
  json::parser_callback_t track = [&](int depth, json::parse_event_t event, json& parsed) {
    if (event == json::parse_event_t::key && depth == 1) {
      const auto key = parsed.get<std::string>();
      if (!seen_keys.insert(key).second && duplicate.empty()) duplicate = key;
    }
    return true;
  };
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end(), track);
  } catch (const json::exception& e) {
    throw validation_error(std::string("malformed lexicon JSON: ") + e.what());
  }
  if (!duplicate.empty()) throw validation_error("duplicate canonical name '" + duplicate + "'");
  if (!doc.is_object()) throw validation_error("lexicon must be a JSON object");
  if (doc.empty()) throw validation_error("lexicon is empty");

  VaccineLexicon lex;
  for (const auto& [canonical, variants] : doc.items()) {
    if (canonical.empty()) throw validation_error("empty canonical name");
    if (!variants.is_array() || variants.empty()) {
      throw validation_error("canonical '" + canonical + "' needs a non-empty variant list");
    }
    LexiconEntry entry{canonical, {}};
    for (const auto& v : variants) {
      if (v.is_string()) {
        entry.variants.push_back({v.get<std::string>(), false});
      } else if (v.is_object() && v.contains("variant")) {
        entry.variants.push_back(
            {v.at("variant").get<std::string>(), v.value("provisional", false)});
      } else {
        throw validation_error("canonical '" + canonical + "' has a malformed variant");
      }
    }
    lex.entries.push_back(std::move(entry));
  }
  return lex;
}

VaccineLexicon load_lexicon(const std::filesystem::path& path) {
  try {
    return parse_lexicon(read_text_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::filesystem::path default_lexicon_path() {
  return std::filesystem::path(VAXSTANCE_DATA_DIR) / "lexicon_default.json";
}

CompiledLexicon CompiledLexicon::compile(const VaccineLexicon& lexicon) {
  if (lexicon.entries.empty()) throw validation_error("lexicon is empty");
  CompiledLexicon out;
  std::map<std::string, std::size_t> owner;  // normalized variant -> canonical index
  std::unordered_set<std::string> canonical_names;
  for (const auto& entry : lexicon.entries) {
    if (!canonical_names.insert(entry.canonical).second) {
      throw validation_error("duplicate canonical name '" + entry.canonical + "'");
    }
    const std::size_t idx = out.canonicals_.size();
    out.canonicals_.push_back(entry.canonical);
    for (const auto& variant : entry.variants) {
      auto tokens = text::tokenize(variant.text);
      if (tokens.empty()) {
        throw validation_error("empty variant under '" + entry.canonical + "'");
      }
      std::string key;
      for (const auto& t : tokens) key += (key.empty() ? "" : " ") + t;
      auto [it, inserted] = owner.emplace(key, idx);
      if (!inserted) {
        if (it->second != idx) {
          throw validation_error("variant '" + key + "' maps to both '" +
                                 out.canonicals_[it->second] + "' and '" + entry.canonical + "'");
        }
        continue;  // repeated within the same entry
      }
      out.by_first_token_[tokens.front()].push_back({std::move(tokens), idx});
      ++out.variant_count_;
    }
  }
  return out;
}

std::set<std::string> CompiledLexicon::match_tokens(
    const std::vector<std::string>& folded_tokens) const {
  std::vector<bool> hit(canonicals_.size(), false);
  for (std::size_t pos = 0; pos < folded_tokens.size(); ++pos) {
    auto it = by_first_token_.find(folded_tokens[pos]);
    if (it == by_first_token_.end()) continue;
    for (const auto& pattern : it->second) {
      if (hit[pattern.canonical] || pos + pattern.tokens.size() > folded_tokens.size()) continue;
      bool match = true;
      for (std::size_t k = 1; k < pattern.tokens.size(); ++k) {
        if (folded_tokens[pos + k] != pattern.tokens[k]) {
          match = false;
          break;
        }
      }
      if (match) hit[pattern.canonical] = true;
    }
  }
  std::set<std::string> out;
  for (std::size_t i = 0; i < hit.size(); ++i) {
    if (hit[i]) out.insert(canonicals_[i]);
  }
  return out;
}

std::set<std::string> CompiledLexicon::match(std::string_view text) const {
  return match_tokens(text::tokenize(text));
}

}  // namespace vaxstance
