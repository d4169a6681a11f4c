#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace equigrid {

/// Seeded random source shared by the environment, policies and solvers.
/// Draw order is part of the determinism contract: identical seeds and call
/// sequences give identical values.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}

    /// Independent stream `stream` for a given seed (environment and policy
    /// draws use different streams so policies share demand draws).
    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
        engine_.seed(seq);
    }

    double standard_normal() { return normal_(engine_); }

    /// Uniform index in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n) {
        std::uniform_int_distribution<std::size_t> dist(0, n - 1);
        return dist(engine_);
    }

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> dist(lo, hi);
        return dist(engine_);
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace equigrid
