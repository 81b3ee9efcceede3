#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace colearn {

// Deterministic randomness for the whole project.
//
// std::mt19937_64 output is pinned by the standard, but the standard
// *distributions* are not, so every mapping from raw engine output to a
// usable value is hand-rolled here. Same seed, same platform-independent
// stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n);

    // Standard normal via Box-Muller; one spare value cached.
    double normal();

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Fisher-Yates shuffle driven by Rng::below, deterministic per seed.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

// Labeled seed derivation: a single master seed fans out into independent
// streams for per-agent init, shuffles, splits and synthetic data. The
// label keeps streams for different roles decorrelated even when indices
// collide.
std::uint64_t derive_seed(std::uint64_t master, std::string_view role, std::uint64_t index);

}  // namespace colearn
