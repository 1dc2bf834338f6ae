#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "mlbfgs/damping.hpp"
#include "mlbfgs/ema.hpp"
#include "mlbfgs/flat_vector.hpp"
#include "mlbfgs/history_buffer.hpp"
#include "mlbfgs/objectives.hpp"

namespace mlbfgs {

/// Heavy-ball SGD; momentum = 0 reduces to the plain rule through the same
/// arithmetic (0 * v + g is bitwise g).
class SgdOptimizer {
 public:
    SgdOptimizer(std::size_t dim, double momentum = 0.0)
        : velocity_(dim), momentum_(momentum) {}

    FlatVector step(const FlatVector& theta, const FlatVector& g, double lr);

 private:
    FlatVector velocity_;
    double momentum_;
};

/// Adam with bias correction.
class AdamOptimizer {
 public:
    AdamOptimizer(std::size_t dim, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : m_(dim), v_(dim), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    FlatVector step(const FlatVector& theta, const FlatVector& g, double lr);

 private:
    FlatVector m_;
    FlatVector v_;
    double beta1_;
    double beta2_;
    double eps_;
    long t_ = 0;
};

/// Full Newton step on a quadratic: theta - B^{-1} g.
FlatVector newton_step_quadratic(const FlatVector& theta, const FlatVector& g,
                                 const QuadraticObjective& obj);

/// Optional selection rule applied before a pair may enter the history.
struct PairFilterConfig {
    bool enabled = false;
    double alpha = 4.0;
    double eps = 0.0;
};

/// Baseline L-BFGS: raw per-iteration differences, no damping and no
/// averaging, pairs skipped (not repaired) on non-positive curvature. First
/// step falls back to SGD. This is deliberately the fragile variant.
class VanillaLbfgsOptimizer {
 public:
    explicit VanillaLbfgsOptimizer(std::size_t history, PairFilterConfig filter = {});

    FlatVector step(const FlatVector& theta, const FlatVector& g, double lr);

    const HistoryBuffer& history() const { return buf_; }
    /// Pairs accepted / windows seen, for premise tracking in verification.
    std::size_t pairs_accepted() const { return accepted_; }
    std::size_t pairs_seen() const { return seen_; }

 private:
    HistoryBuffer buf_;
    std::optional<FlatVector> prev_theta_;
    std::optional<FlatVector> prev_grad_;
    PairFilterConfig filter_;
    std::size_t accepted_ = 0;
    std::size_t seen_ = 0;
};

/// Configuration of the momentum-averaged block L-BFGS rule.
struct MlbfgsConfig {
    long update_period = 50;     // iterations between curvature updates (T)
    std::size_t history = 10;    // stored pairs per block (M)
    double beta = 0.999;         // parameter/gradient averaging coefficient
    DampingConfig damping{};
    bool use_damping = true;     // off: push raw y when s'y > 0, else skip
    double step_momentum = 0.9;  // heavy-ball on the update direction
    PairFilterConfig filter{};

    void validate() const;
    long warmup_iters() const { return 2 * update_period; }
};

/// Per-iteration bookkeeping reported by a block step, mainly for the
/// distributed simulation's cost counters.
struct BlockStepResult {
    FlatVector theta_next;
    bool preconditioned = false;
    std::size_t pairs_used = 0;
    bool pair_pushed = false;
};

/// The step rule for one parameter block: averaging every iteration, SGD
/// during the first 2T iterations, implicit Hessian preconditioning after,
/// and a damped curvature push every T-th iteration. Iterations are 1-based;
/// construction is the t = 0 initialization with the block's theta_0, g_0.
class MlbfgsBlockOptimizer {
 public:
    MlbfgsBlockOptimizer(const MlbfgsConfig& cfg, const FlatVector& theta0_block,
                         const FlatVector& grad0_block);

    BlockStepResult step(const FlatVector& theta_block, const FlatVector& grad_block, long t,
                         double lr);

    const HistoryBuffer& history() const { return buf_; }
    const EmaState& ema() const { return ema_; }
    /// Stored history footprint in scalar elements: 2 * pairs * block dim.
    std::size_t history_elems() const { return 2 * buf_.size() * dim_; }

 private:
    bool maybe_push(FlatVector s, FlatVector y);

    MlbfgsConfig cfg_;
    EmaState ema_;
    HistoryBuffer buf_;
    FlatVector velocity_;
    std::size_t dim_;
};

}  // namespace mlbfgs
