// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vaxstance {

struct LexiconVariant {
  std::string text;          // as written in the file
  bool provisional = false;  // added from corpus n-gram inspection, not official sources
};

struct LexiconEntry {
  std::string canonical;
  std::vector<LexiconVariant> variants;
};

/// Canonical vaccine name -> lexical variants, in file order.
struct VaccineLexicon {
  std::vector<LexiconEntry> entries;
};

/// Parses the JSON map {canonical: [variant | {"variant": ..., "provisional": bool}]}.
/// Rejects duplicate canonical keys and an empty map.
VaccineLexicon parse_lexicon(std::string_view json_text);
VaccineLexicon load_lexicon(const std::filesystem::path& path);

/// Path of the lexicon shipped with the project (19 schedule vaccines).
std::filesystem::path default_lexicon_path();

/// Whole-word, case- and accent-insensitive matcher. Multi-word variants
/// match as contiguous token runs. Immutable and safe to share across threads.
class CompiledLexicon {
 public:
  /// Throws a validation Error on an empty lexicon, an empty variant, or a
  /// variant (after folding) listed under two canonical names.
  static CompiledLexicon compile(const VaccineLexicon& lexicon);

  /// Canonical names with at least one matching variant; empty when none.
  std::set<std::string> match(std::string_view text) const;
  std::set<std::string> match_tokens(const std::vector<std::string>& folded_tokens) const;

  const std::vector<std::string>& canonicals() const noexcept { return canonicals_; }
  std::size_t size() const noexcept { return canonicals_.size(); }
  std::size_t variant_count() const noexcept { return variant_count_; }

 private:
  struct Pattern {
    std::vector<std::string> tokens;
    std::size_t canonical;
  };
  std::vector<std::string> canonicals_;
  std::unordered_map<std::string, std::vector<Pattern>> by_first_token_;
  std::size_t variant_count_ = 0;
};

inline CompiledLexicon compile_lexicon(const std::filesystem::path& path) {
  return CompiledLexicon::compile(load_lexicon(path));
}

inline std::set<std::string> match_comment(std::string_view text, const CompiledLexicon& lex) {
  return lex.match(text);
}

}  // namespace vaxstance
