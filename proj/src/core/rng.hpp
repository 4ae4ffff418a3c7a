#pragma once

#include <cstdint>
#include <string_view>

namespace esteval {

// Counter-based SplitMix64 stream.
//
// Every consumer derives its own stream from (master seed, tag, index):
// the key is master hashed together with FNV-1a64(tag) and the index, and
// output i is the SplitMix64 finalizer applied to key + (i+1)*GOLDEN.
// Streams are therefore pure functions of their derivation triple, which is
// what makes replications reproducible regardless of thread count or
// execution order.
class Rng {
public:
    static Rng from(uint64_t master, std::string_view tag, uint64_t index);

    uint64_t next_u64();
    // 53-bit mantissa uniform in [0, 1).
    double next_double();
    // Uniform in {0, ..., n-1}, unbiased (Lemire multiply-with-rejection).
    uint64_t next_below(uint64_t n);
    // Standard normal via Marsaglia polar; one spare is cached.
    double next_gaussian();

private:
    explicit Rng(uint64_t key) : key_(key) {}

    uint64_t key_;
    uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

uint64_t fnv1a64(std::string_view s);
uint64_t splitmix64_finalize(uint64_t z);

}  // namespace esteval
