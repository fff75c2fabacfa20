#pragma once

#include <filesystem>
#include <string>

namespace advclaim {

// Both throw IoError naming the path.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace advclaim
