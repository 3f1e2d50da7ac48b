#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace slidegym {

/// SHA-256 digest of the input bytes.
std::array<std::uint8_t, 32> sha256(std::string_view data);

/// SHA-256 digest as a lowercase hex string.
std::string sha256_hex(std::string_view data);

}  // namespace slidegym
