// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace vaxstance {

/// Stance toward vaccination. The enumerator order is the canonical class
/// order used by probability vectors and every tie-break in the pipeline.
enum class Stance : std::uint8_t { kFavorable = 0, kAgainst = 1, kInconclusive = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<Stance, kNumClasses> kAllStances = {
    Stance::kFavorable, Stance::kAgainst, Stance::kInconclusive};

/// Per-class integer counts indexed by `index(Stance)`.
using ClassCounts = std::array<std::int64_t, kNumClasses>;
/// Per-class reals indexed by `index(Stance)`.
using ClassValues = std::array<double, kNumClasses>;

constexpr std::size_t index(Stance s) noexcept { return static_cast<std::size_t>(s); }
constexpr Stance stance_at(std::size_t i) noexcept { return static_cast<Stance>(i); }

constexpr bool is_polarized(Stance s) noexcept {
  return s == Stance::kFavorable || s == Stance::kAgainst;
}

/// "FAVORABLE" / "AGAINST" / "INCONCLUSIVE".
std::string_view to_string(Stance s) noexcept;

/// Accepts the canonical upper-case names (case-insensitive) and the
/// single-letter abbreviations F/A/I.
std::optional<Stance> parse_stance(std::string_view text) noexcept;

/// Like parse_stance but throws a validation Error naming the bad value.
Stance require_stance(std::string_view text);

}  // namespace vaxstance
