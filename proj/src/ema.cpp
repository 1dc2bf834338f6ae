#include "mlbfgs/ema.hpp"

#include <stdexcept>

#include "mlbfgs/errors.hpp"

namespace mlbfgs {

EmaState::EmaState(FlatVector theta0, FlatVector grad0, double beta)
    : avg_theta_(std::move(theta0)), avg_grad_(std::move(grad0)), beta_(beta) {
    check_same_dim(avg_theta_, avg_grad_, "EmaState");
    if (beta < 0.0 || beta >= 1.0) {
        throw std::invalid_argument("EmaState: beta must lie in [0, 1)");
    }
}

const FlatVector& EmaState::snap_theta() const {
    if (!snap_theta_) throw std::logic_error("EmaState: no snapshot taken yet");
    return *snap_theta_;
}

const FlatVector& EmaState::snap_grad() const {
    if (!snap_grad_) throw std::logic_error("EmaState: no snapshot taken yet");
    return *snap_grad_;
}

void EmaState::update(const FlatVector& theta, const FlatVector& grad) {
    check_same_dim(avg_theta_, theta, "EmaState::update theta");
    check_same_dim(avg_grad_, grad, "EmaState::update grad");
    avg_theta_.blend(theta, beta_);
    avg_grad_.blend(grad, beta_);
}

void EmaState::take_snapshot() {
    snap_theta_ = avg_theta_;
    snap_grad_ = avg_grad_;
}

std::pair<FlatVector, FlatVector> EmaState::form_pair() {
    if (!has_snapshot()) {
        throw std::logic_error("EmaState::form_pair called before any snapshot exists");
    }
    FlatVector s = avg_theta_ - *snap_theta_;
    FlatVector y = avg_grad_ - *snap_grad_;
    take_snapshot();
    return {std::move(s), std::move(y)};
}

}  // namespace mlbfgs
