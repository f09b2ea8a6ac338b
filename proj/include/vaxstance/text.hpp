// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vaxstance::text {

/// Lowercases and strips diacritics from UTF-8 text.
///
/// Covers Latin-1 Supplement and Latin Extended-A (everything Portuguese
/// needs) and drops combining marks U+0300..U+036F, so NFC and NFD inputs
/// fold identically. Other code points are copied through unchanged and
/// malformed byte sequences become a single space.
std::string fold(std::string_view utf8);

/// Splits folded text into word tokens. A token is a maximal run of ASCII
/// letters/digits or non-ASCII letters; everything else separates.
std::vector<std::string> tokenize_folded(std::string_view folded);

/// fold() followed by tokenize_folded().
std::vector<std::string> tokenize(std::string_view utf8);

/// True when `needle` occurs in `haystack` as a contiguous token run.
bool contains_sequence(const std::vector<std::string>& haystack,
                       const std::vector<std::string>& needle);

}  // namespace vaxstance::text
