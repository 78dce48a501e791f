#pragma once

#include <string>

namespace fracheat {

// SHA-256 of the byte string, as 64 lowercase hex characters.
std::string sha256_hex(const std::string& bytes);

}  // namespace fracheat
