#pragma once

#include <cstdint>
#include <vector>

namespace herdlab {

// splitmix64 (Sebastiano Vigna, public domain). Chosen as the project-wide
// generator because it is tiny, stateless beyond one word, and produces the
// same stream on every platform and compiler. Documented in README.md so the
// rating draws are reproducible outside this codebase.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform on [0, 1) with 53-bit resolution
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Decorrelated seed for substream k of a master seed. Used so parallel loops
// (Monte Carlo rounds, restarts) get fixed per-task streams regardless of
// thread scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k);

// Inverse-CDF draw: walks the cumulative sums of pmf and returns the first
// index whose cumulative mass exceeds the uniform variate. Zero-mass levels
// are never returned. Consumes exactly one draw.
std::size_t draw_categorical(SplitMix64& gen, const std::vector<double>& pmf);

// Uniform point on the m-simplex (symmetric Dirichlet with unit
// concentration), via normalized standard exponentials. Consumes m draws.
std::vector<double> draw_simplex_uniform(SplitMix64& gen, std::size_t m);

} // namespace herdlab
