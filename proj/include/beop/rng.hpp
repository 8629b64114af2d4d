#pragma once

#include <cstdint>
#include <random>

namespace beop {

/// Seeded random stream with hand-rolled distributions so that sampled
/// artifacts are byte-reproducible across standard library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double uniform01();

    /// Uniform integer in [lo, hi], inclusive, unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    double uniform_real(double lo, double hi);

    /// Normal draw via Box-Muller (cosine branch only, one draw per call).
    double normal(double mean, double sigma);

    bool bernoulli(double p);

    /// Independent child stream; forking with distinct ids gives streams that
    /// can be consumed in any order (parallel rollouts, per-instance sampling).
    Rng fork(std::uint64_t stream_id) const;

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace beop
