#pragma once

#include <string>
#include <string_view>

namespace vulnforge {

// Lowercase hex SHA-256 of the raw bytes.
std::string sha256_hex(std::string_view bytes);

inline constexpr std::string_view kDigestAlgorithm = "sha256";

}  // namespace vulnforge
