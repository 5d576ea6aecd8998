#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace chorusnet {

// SHA-256 digest of a byte string, as lowercase hex.
std::string sha256_hex(std::string_view data);

} // namespace chorusnet
