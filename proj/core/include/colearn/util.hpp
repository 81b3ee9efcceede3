#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace colearn {

// FNV-1a, the project-wide stable 64-bit hash (config hashes, fingerprints,
// parameter checksums).
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) {
    return fnv1a(s.data(), s.size(), h);
}

// Checksum of a parameter vector's raw bytes; used by the round log.
std::uint64_t checksum(std::span<const double> values);

std::string to_hex(std::uint64_t v);

// Shortest round-trip decimal form of a double (std::to_chars). Equal
// doubles always print the same bytes, which is what makes metric CSVs
// byte-reproducible.
std::string format_double(double v);

// Parse helpers that reject trailing garbage.
double parse_double(std::string_view s, bool* ok);
long long parse_int(std::string_view s, bool* ok);

std::string trim(std::string_view s);

}  // namespace colearn
