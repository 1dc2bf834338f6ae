#include "mlbfgs/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mlbfgs {

void Schedule::validate() const {
    if (!(base >= 0.0)) throw std::invalid_argument("Schedule: negative base rate");
    if (kind == Kind::Cosine) {
        if (min > base) throw std::invalid_argument("Schedule: min rate exceeds base");
        if (horizon < 1) throw std::invalid_argument("Schedule: horizon must be >= 1");
    }
    if (kind == Kind::Step && interval < 1) {
        throw std::invalid_argument("Schedule: step interval must be >= 1");
    }
}

double Schedule::at(long t) const {
    if (t < 0) throw std::invalid_argument("Schedule: negative iteration");
    switch (kind) {
        case Kind::Constant:
            return base;
        case Kind::Step:
            return base * std::pow(factor, static_cast<double>(t / interval));
        case Kind::Cosine: {
            if (t >= horizon) return min;
            const double phase =
                std::numbers::pi * static_cast<double>(t) / static_cast<double>(horizon);
            return min + 0.5 * (base - min) * (1.0 + std::cos(phase));
        }
    }
    return base;
}

}  // namespace mlbfgs
