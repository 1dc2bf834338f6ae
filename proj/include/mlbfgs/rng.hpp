#pragma once

#include <cstdint>

#include "mlbfgs/flat_vector.hpp"

namespace mlbfgs {

/// Counter-based pseudo-random stream. Output i depends only on (key, i), so
/// identical seed + identical call sequence gives bit-identical results, and
/// split() derives statistically independent child streams without sharing
/// state. Core mixer is the splitmix64 finalizer.
class RngStream {
 public:
    explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ kKeySalt)) {}

    /// Independent child stream; position starts at 0. split(a) != split(b)
    /// for a != b, and neither collides with the parent's own sequence.
    RngStream split(std::uint64_t stream_id) const;

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    double next_unit();

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double next_gaussian();

    /// i.i.d. N(0, sigma^2) entries; sigma = 0 returns zeros and consumes
    /// nothing. Negative sigma is rejected.
    FlatVector gaussian_vector(std::size_t dim, double sigma);

 private:
    static constexpr std::uint64_t kKeySalt = 0xA3EC4E8C6D19F5B2ULL;
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix(std::uint64_t z);

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Free-function form used by the noise model: entries i.i.d. N(0, sigma^2).
FlatVector gaussian_noise(RngStream& rng, std::size_t dim, double sigma);

}  // namespace mlbfgs
