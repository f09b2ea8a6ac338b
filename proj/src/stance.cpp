// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/stance.hpp"

#include "vaxstance/error.hpp"

#include <algorithm>
#include <cctype>

namespace vaxstance {

std::string_view to_string(Stance s) noexcept {
  switch (s) {
    case Stance::kFavorable:
      return "FAVORABLE";
    case Stance::kAgainst:
      return "AGAINST";
    case Stance::kInconclusive:
      return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

std::optional<Stance> parse_stance(std::string_view text) noexcept {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "FAVORABLE" || upper == "F") return Stance::kFavorable;
  if (upper == "AGAINST" || upper == "A") return Stance::kAgainst;
  if (upper == "INCONCLUSIVE" || upper == "I") return Stance::kInconclusive;
  return std::nullopt;
}

Stance require_stance(std::string_view text) {
  if (auto s = parse_stance(text)) return *s;
  throw validation_error("unknown stance '" + std::string(text) + "'");
}

}  // namespace vaxstance
