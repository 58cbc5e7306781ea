#pragma once

#include <cstdint>
#include <random>

namespace stobit {

/// Random stream used throughout the library. Owns a 64-bit Mersenne Twister
/// and implements its own variate generators so that draws are identical
/// across standard-library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream number `index` derived from a master seed
    /// (counter-based split through SplitMix64).
    static Rng stream(std::uint64_t master_seed, std::uint64_t index);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Exact Poisson draw: sequential-search inversion for mean <= 30,
    /// transformed rejection (PTRS) above.
    long poisson(double mean);

    /// Exact Binomial(trials, prob) draw.
    long binomial(long trials, double prob);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace stobit
