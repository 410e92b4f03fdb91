#pragma once

#include <string>
#include <string_view>

namespace depprobe {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);
/// Lowercase hex SHA-256 of a file's contents. Throws IoError.
std::string sha256_file(const std::string& path);

std::string base64_encode(std::string_view bytes);
/// Throws FormatError on malformed input.
std::string base64_decode(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace depprobe
