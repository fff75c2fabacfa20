#include "advclaim/numkit/hash.hpp"

#include <cstdio>

namespace advclaim {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string content_hash(std::string_view bytes) { return hex64(fnv1a64(bytes)); }

}  // namespace advclaim
