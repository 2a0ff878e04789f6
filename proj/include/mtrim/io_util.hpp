#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

namespace mtrim::io {

// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex16(std::uint64_t value);
std::uint64_t from_hex16(const std::string& hex);

std::string read_file_bytes(const std::filesystem::path& path);

// Writes via a temporary file in the target directory and renames it into
// place, so readers never observe a partially written file.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& body);
void atomic_write_bytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace mtrim::io
