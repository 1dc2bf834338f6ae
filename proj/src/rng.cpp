#include "mlbfgs/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mlbfgs {

std::uint64_t RngStream::mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

RngStream RngStream::split(std::uint64_t stream_id) const {
    RngStream child(0);
    child.key_ = mix(key_ ^ mix(stream_id * kGolden + 0x1F123BB5159A55E5ULL));
    child.counter_ = 0;
    return child;
}

std::uint64_t RngStream::next_u64() {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
}

double RngStream::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
    // u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - next_unit();
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

FlatVector RngStream::gaussian_vector(std::size_t dim, double sigma) {
    if (sigma < 0.0) {
        throw std::invalid_argument("gaussian_vector: negative sigma");
    }
    FlatVector out(dim);
    if (sigma == 0.0) return out;
    // Box-Muller pairs; both outputs are used when filling bulk vectors.
    std::size_t i = 0;
    while (i + 1 < dim) {
        double u1 = 1.0 - next_unit();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        out[i++] = sigma * r * std::cos(a);
        out[i++] = sigma * r * std::sin(a);
    }
    if (i < dim) out[i] = sigma * next_gaussian();
    return out;
}

FlatVector gaussian_noise(RngStream& rng, std::size_t dim, double sigma) {
    return rng.gaussian_vector(dim, sigma);
}

}  // namespace mlbfgs
