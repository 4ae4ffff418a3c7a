#include "core/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace esteval {

namespace {
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

uint64_t splitmix64_finalize(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

Rng Rng::from(uint64_t master, std::string_view tag, uint64_t index) {
    uint64_t key = splitmix64_finalize(master + kGolden);
    key = splitmix64_finalize(key ^ fnv1a64(tag));
    key = splitmix64_finalize(key ^ index);
    return Rng(key);
}

uint64_t Rng::next_u64() {
    ++counter_;
    return splitmix64_finalize(key_ + counter_ * kGolden);
}

double Rng::next_double() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::next_below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be positive");
    uint64_t x = next_u64();
    __uint128_t m = __uint128_t(x) * n;
    uint64_t lo = uint64_t(m);
    if (lo < n) {
        uint64_t threshold = (0 - n) % n;
        while (lo < threshold) {
            x = next_u64();
            m = __uint128_t(x) * n;
            lo = uint64_t(m);
        }
    }
    return uint64_t(m >> 64);
}

double Rng::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * next_double() - 1.0;
        v = 2.0 * next_double() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
}

}  // namespace esteval
