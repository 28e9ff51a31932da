#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace geodtr {

/// MD5 digest as a lowercase hex string.
std::string md5_hex(const unsigned char* data, std::size_t len);
std::string md5_hex(const std::vector<unsigned char>& data);

}  // namespace geodtr
