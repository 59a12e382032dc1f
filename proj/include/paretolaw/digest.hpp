#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace paretolaw {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string file_digest(const std::filesystem::path& path);

}  // namespace paretolaw
