#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ntpsim {

// RFC 1321 MD5. Present for the keyed packet digests only; nothing here is a
// statement about MD5's fitness as a modern MAC.
std::array<uint8_t, 16> md5(const uint8_t* data, size_t len);
std::array<uint8_t, 16> md5(const std::vector<uint8_t>& data);

std::string hex_digest(const std::array<uint8_t, 16>& digest);

}  // namespace ntpsim
