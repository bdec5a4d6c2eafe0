#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace scss {

/// Versioned binary container: magic "SCSSBND1", little-endian u32 header
/// length, JSON header, raw little-endian double payload. The header embeds
/// an FNV-1a digest of the payload so cached tables can be verified.
inline constexpr char kContainerMagic[8] = {'S', 'C', 'S', 'S', 'B', 'N', 'D', '1'};

std::uint64_t fnv1a64(const void* data, std::size_t bytes);

struct Container {
  nlohmann::json header;
  std::vector<double> payload;
};

/// Writes header + payload; fills header["payload_doubles"] and
/// header["digest"] before serializing.
void write_container(const std::filesystem::path& path, nlohmann::json header,
                     std::span<const double> payload);

/// Throws CorruptHeader / UnsupportedFormat / IoError.
Container read_container(const std::filesystem::path& path);

/// Recomputes the payload digest and compares with the header.
/// Returns false (with a message) on mismatch.
bool verify_container(const std::filesystem::path& path, std::string* message = nullptr);

}  // namespace scss
