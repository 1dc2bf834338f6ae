#include "mlbfgs/optimizers.hpp"

#include <cmath>
#include <stdexcept>

#include "mlbfgs/errors.hpp"

namespace mlbfgs {

FlatVector SgdOptimizer::step(const FlatVector& theta, const FlatVector& g, double lr) {
    check_same_dim(velocity_, g, "SgdOptimizer::step");
    velocity_.scale(momentum_);
    velocity_.add(g);
    FlatVector next = theta;
    next.add_scaled(velocity_, -lr);
    return next;
}

FlatVector AdamOptimizer::step(const FlatVector& theta, const FlatVector& g, double lr) {
    check_same_dim(m_, g, "AdamOptimizer::step");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    FlatVector next = theta;
    for (std::size_t i = 0; i < g.dim(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g[i] * g[i];
        const double mhat = m_[i] / c1;
        const double vhat = v_[i] / c2;
        next[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
    return next;
}

FlatVector newton_step_quadratic(const FlatVector& theta, const FlatVector& g,
                                 const QuadraticObjective& obj) {
    FlatVector next = theta;
    next.sub(obj.solve(g));
    return next;
}

VanillaLbfgsOptimizer::VanillaLbfgsOptimizer(std::size_t history, PairFilterConfig filter)
    : buf_(history), filter_(filter) {}

FlatVector VanillaLbfgsOptimizer::step(const FlatVector& theta, const FlatVector& g, double lr) {
    if (prev_theta_) {
        FlatVector s = theta - *prev_theta_;
        FlatVector y = g - *prev_grad_;
        ++seen_;
        const bool selected =
            !filter_.enabled || pair_filter(s, y, filter_.alpha, filter_.eps);
        if (selected && dot(s, y) > 0.0) {
            buf_.push(std::move(s), std::move(y));
            ++accepted_;
        }
    }
    prev_theta_ = theta;
    prev_grad_ = g;

    FlatVector dir = buf_.empty() ? g : two_loop_apply(buf_, g);
    FlatVector next = theta;
    next.add_scaled(dir, -lr);
    return next;
}

void MlbfgsConfig::validate() const {
    if (update_period < 1) throw std::invalid_argument("MlbfgsConfig: update period must be >= 1");
    if (history < 1) throw std::invalid_argument("MlbfgsConfig: history must be >= 1");
    if (beta < 0.0 || beta >= 1.0) throw std::invalid_argument("MlbfgsConfig: beta outside [0, 1)");
    if (step_momentum < 0.0 || step_momentum >= 1.0) {
        throw std::invalid_argument("MlbfgsConfig: step momentum outside [0, 1)");
    }
    if (use_damping) damping.validate();
}

MlbfgsBlockOptimizer::MlbfgsBlockOptimizer(const MlbfgsConfig& cfg,
                                           const FlatVector& theta0_block,
                                           const FlatVector& grad0_block)
    : cfg_(cfg),
      ema_(theta0_block, grad0_block, cfg.beta),
      buf_(cfg.history),
      velocity_(theta0_block.dim()),
      dim_(theta0_block.dim()) {
    cfg_.validate();
}

bool MlbfgsBlockOptimizer::maybe_push(FlatVector s, FlatVector y) {
    // A stalled window gives a near-zero step whose rho would overflow.
    if (norm(s) < 1e-12 * std::sqrt(static_cast<double>(dim_))) return false;
    if (cfg_.filter.enabled && !pair_filter(s, y, cfg_.filter.alpha, cfg_.filter.eps)) {
        return false;
    }
    if (cfg_.use_damping) {
        auto damped = damp_pair(s, y, cfg_.damping);
        buf_.push(std::move(s), std::move(damped.y_hat));
        return true;
    }
    if (dot(s, y) > 0.0) {
        buf_.push(std::move(s), std::move(y));
        return true;
    }
    return false;
}

BlockStepResult MlbfgsBlockOptimizer::step(const FlatVector& theta_block,
                                           const FlatVector& grad_block, long t, double lr) {
    if (t < 1) throw std::invalid_argument("MlbfgsBlockOptimizer: iterations are 1-based");
    check_same_dim(theta_block, grad_block, "MlbfgsBlockOptimizer::step");
    if (theta_block.dim() != dim_) {
        throw DimensionMismatchError("MlbfgsBlockOptimizer: block dim changed");
    }

    ema_.update(theta_block, grad_block);

    BlockStepResult out;
    FlatVector dir;
    if (t > cfg_.warmup_iters() && !buf_.empty()) {
        dir = two_loop_apply(buf_, grad_block);
        out.preconditioned = true;
        out.pairs_used = buf_.size();
    } else {
        dir = grad_block;  // warmup, or no curvature collected yet
    }
    velocity_.scale(cfg_.step_momentum);
    velocity_.add(dir);
    out.theta_next = theta_block;
    out.theta_next.add_scaled(velocity_, -lr);

    // Curvature bookkeeping runs after the parameter update.
    if (t % cfg_.update_period == 0) {
        if (t == cfg_.update_period) {
            ema_.take_snapshot();
        } else {
            auto [s, y] = ema_.form_pair();
            out.pair_pushed = maybe_push(std::move(s), std::move(y));
        }
    }
    return out;
}

}  // namespace mlbfgs
