#include "stobit/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace stobit {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

Rng Rng::stream(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

long Rng::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::domain_error("poisson: mean must be finite and nonnegative");
    if (mean == 0.0) return 0;

    if (mean <= 30.0) {
        double p = std::exp(-mean);
        double cdf = p;
        const double u = uniform();
        long k = 0;
        while (u > cdf) {
            ++k;
            p *= mean / k;
            cdf += p;
            // Guard against rounding leaving cdf a hair below u far in the tail.
            if (p < 1e-300 && k > mean) break;
        }
        return k;
    }

    // Hörmann (1993), transformed rejection with squeeze.
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = uniform() - 0.5;
        const double v = uniform();
        const double us = 0.5 - std::abs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<long>(kd);
        if (kd < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + kd * loglam - std::lgamma(kd + 1.0)) {
            return static_cast<long>(kd);
        }
    }
}

long Rng::binomial(long trials, double prob) {
    if (trials < 0) throw std::domain_error("binomial: negative trial count");
    if (!(prob >= 0.0 && prob <= 1.0)) throw std::domain_error("binomial: probability outside [0,1]");
    if (prob == 0.0 || trials == 0) return 0;
    if (prob == 1.0) return trials;
    long count = 0;
    for (long i = 0; i < trials; ++i) {
        if (uniform() < prob) ++count;
    }
    return count;
}

}  // namespace stobit
