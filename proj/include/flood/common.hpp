#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flood {

// Error categories map onto CLI exit codes: usage 1, data/validation 2,
// numerical 3.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct parse_error : error {
    using error::error;
};
struct validation_error : error {
    using error::error;
};
struct io_error : error {
    using error::error;
};
struct numerical_error : error {
    using error::error;
};

// Shortest round-trip rendering of a double (to_chars); "0" for 0.0.
std::string format_double(double v);

// Locale-independent parse of a full token; throws parse_error on anything
// but a complete finite number.
double parse_double(std::string_view token, std::string_view what);
long parse_long(std::string_view token, std::string_view what);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view line, char sep);

// Reads a whole text file; throws io_error if unreadable.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// 64-bit FNV-1a, used as the model container checksum.
std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed = 14695981039346656037ull);

// Deterministic uniform in [0,1) from a raw 64-bit draw; avoids the
// implementation-defined std::uniform_real_distribution.
inline double u01(std::uint64_t raw) {
    return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

// Stable seed derivation for per-leg / per-epoch streams.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);

enum class LogLevel { quiet = 0, info = 1, debug = 2 };
// Reads FLOOD_LOG (quiet|info|debug); defaults to info.
LogLevel log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace flood
