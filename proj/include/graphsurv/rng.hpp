#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace graphsurv {

// Seeded random source with fixed draw arithmetic. The standard distribution
// adapters are implementation-defined, which would make traces and simulated
// histories differ across standard libraries; every draw here is pinned to
// mt19937_64 output so a seed fully determines all results.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double exponential(double rate) {
        if (!(rate > 0.0)) {
            throw std::invalid_argument("exponential rate must be positive");
        }
        return -std::log1p(-uniform()) / rate;
    }

    // Uniform integer in [0, n); rejection keeps the draw unbiased.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) {
            throw std::invalid_argument("below(0) is undefined");
        }
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Symmetric uniform on [-half_width, half_width).
    double uniform_symmetric(double half_width) {
        return (2.0 * uniform() - 1.0) * half_width;
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace graphsurv
