#pragma once

#include <optional>
#include <utility>

#include "mlbfgs/flat_vector.hpp"

namespace mlbfgs {

/// Exponential moving averages of parameters and gradients, plus snapshots of
/// both taken at the last curvature update. Curvature pairs are differences
/// of the averages across one update window, which is what suppresses
/// gradient noise in the pair without extra gradient evaluations.
class EmaState {
 public:
    /// Averages start at the initial parameter/gradient values.
    EmaState(FlatVector theta0, FlatVector grad0, double beta);

    double beta() const { return beta_; }
    std::size_t dim() const { return avg_theta_.dim(); }

    const FlatVector& avg_theta() const { return avg_theta_; }
    const FlatVector& avg_grad() const { return avg_grad_; }
    bool has_snapshot() const { return snap_theta_.has_value(); }
    const FlatVector& snap_theta() const;
    const FlatVector& snap_grad() const;

    /// avg <- beta * avg + (1 - beta) * current, for both accumulators.
    void update(const FlatVector& theta, const FlatVector& grad);

    /// Record the current averages as the reference point for the next pair.
    void take_snapshot();

    /// Pair (s, y) = (avg_theta - snap_theta, avg_grad - snap_grad); the
    /// snapshots are refreshed to the current averages afterwards. Requires a
    /// prior snapshot. Calling twice without an intervening update yields a
    /// zero pair, which the caller must reject.
    std::pair<FlatVector, FlatVector> form_pair();

 private:
    FlatVector avg_theta_;
    FlatVector avg_grad_;
    std::optional<FlatVector> snap_theta_;
    std::optional<FlatVector> snap_grad_;
    double beta_;
};

}  // namespace mlbfgs
