#include "colearn/rng.hpp"

#include "colearn/util.hpp"

#include <cmath>
#include <numbers>

namespace colearn {

std::uint64_t Rng::below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t x;
    do {
        x = eng_();
    } while (x > limit);
    return x % n;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view role, std::uint64_t index) {
    std::uint64_t h = fnv1a(role);
    h = fnv1a(&index, sizeof(index), h);
    return splitmix64(master ^ h);
}

}  // namespace colearn
