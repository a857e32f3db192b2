#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace codezoom {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

std::uint64_t fnv1a64(std::string_view data);

/// Throws std::runtime_error when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

} // namespace codezoom
