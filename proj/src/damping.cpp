#include "mlbfgs/damping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mlbfgs/errors.hpp"

namespace mlbfgs {

void DampingConfig::validate() const {
    if (!(sigma_lo > 0.0 && sigma_lo < 1.0)) {
        throw std::invalid_argument("DampingConfig: sigma_lo must lie in (0, 1)");
    }
    if (!(sigma_hi > 1.0)) {
        throw std::invalid_argument("DampingConfig: sigma_hi must exceed 1");
    }
    if (!(tau0 > 0.0 && tau0 < 1.0)) {
        throw std::invalid_argument("DampingConfig: tau0 must lie in (0, 1)");
    }
}

DampedPair damp_pair(const FlatVector& s, const FlatVector& y, const DampingConfig& cfg) {
    check_same_dim(s, y, "damp_pair");
    cfg.validate();
    const double ss = squared_norm(s);
    if (ss == 0.0) {
        throw std::invalid_argument("damp_pair: zero s vector");
    }
    const double mu = dot(s, y) / ss;
    double tau;
    if (mu <= cfg.sigma_lo) {
        tau = std::min((1.0 - cfg.sigma_lo) / (1.0 - mu), cfg.tau0);
    } else if (mu >= cfg.sigma_hi) {
        tau = std::min((cfg.sigma_hi - 1.0) / (mu - 1.0), cfg.tau0);
    } else {
        tau = cfg.tau0;
    }
    // s + tau * (y - s) rather than tau*y + (1-tau)*s: algebraically the same
    // blend, but exact (no rounding) at the y = s fixed point.
    FlatVector y_hat = y;
    y_hat.sub(s);
    y_hat.scale(tau);
    y_hat.add(s);
    return {std::move(y_hat), tau};
}

bool pair_filter(const FlatVector& s, const FlatVector& y, double alpha, double eps) {
    check_same_dim(s, y, "pair_filter");
    return dot(s, y) >= alpha * eps * norm(s);
}

}  // namespace mlbfgs
