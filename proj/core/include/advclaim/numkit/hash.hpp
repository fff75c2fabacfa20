#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace advclaim {

// FNV-1a, 64-bit. Content fingerprint for snapshots, configs and artifacts.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t value);
std::string content_hash(std::string_view bytes);

}  // namespace advclaim
