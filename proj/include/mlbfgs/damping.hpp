#pragma once

#include <utility>

#include "mlbfgs/flat_vector.hpp"

namespace mlbfgs {

/// Thresholds for the adaptive damping of curvature pairs. Requires
/// 0 < sigma_lo < 1 < sigma_hi and 0 < tau0 < 1.
struct DampingConfig {
    double sigma_lo = 0.01;
    double sigma_hi = 1.5;
    double tau0 = 0.99;

    void validate() const;
};

struct DampedPair {
    FlatVector y_hat;
    double tau;
};

/// Blend y toward s, choosing tau so that the damped curvature ratio
/// s'y_hat / s's lands inside [sigma_lo, sigma_hi]; ratios already inside the
/// band are blended with the constant tau0. Rejects s = 0.
DampedPair damp_pair(const FlatVector& s, const FlatVector& y, const DampingConfig& cfg);

/// Selection rule for noisy pairs: accept iff <s, y> >= alpha * eps * ||s||.
/// With eps = 0 this degenerates to accepting non-negative curvature.
bool pair_filter(const FlatVector& s, const FlatVector& y, double alpha, double eps);

}  // namespace mlbfgs
