// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace vaxstance {

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's contents; throws a missing-input Error if unreadable.
std::string sha256_file(const std::filesystem::path& path);

/// 64-bit FNV-1a. Used for short, stable, non-cryptographic keys.
std::uint64_t fnv1a64(std::string_view data) noexcept;

}  // namespace vaxstance
