#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ghgrl {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// FNV-1a followed by a SplitMix64 finalizer. Stable across platforms and
/// runs, unlike std::hash.
std::uint64_t stable_hash64(std::string_view bytes) noexcept;

}  // namespace ghgrl
