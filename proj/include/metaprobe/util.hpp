#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace metaprobe::util {

// Whitespace handling used everywhere text is compared or hashed.
std::string trim(const std::string& s);
std::string collapse_whitespace(const std::string& s);
std::string lowercase(const std::string& s);

// NFC + trim + collapse of internal whitespace runs. Input must be valid UTF-8.
std::string normalize_text(const std::string& s);

// SHA-256 of the given bytes, lowercase hex.
std::string sha256_hex(const std::string& data);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// Cache codec: little-endian float32 per coefficient, base64 wrapped.
std::string encode_vector_f32(const Eigen::VectorXd& v);
Eigen::VectorXd decode_vector_f32(const std::string& b64);
// Quantize through the cache codec so cached and fresh vectors are bit-equal.
Eigen::VectorXd quantize_f32(const Eigen::VectorXd& v);

// Shortest round-trip decimal form, identical to the JSON serialization.
std::string format_double(double x);

std::vector<std::string> split(const std::string& s, char sep);
std::string join(const std::vector<std::string>& parts, const std::string& sep);
bool starts_with(const std::string& s, const std::string& prefix);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
std::vector<std::string> read_lines(const std::string& path);

}  // namespace metaprobe::util
