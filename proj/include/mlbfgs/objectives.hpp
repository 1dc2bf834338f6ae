#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "mlbfgs/dataset.hpp"
#include "mlbfgs/flat_vector.hpp"
#include "mlbfgs/rng.hpp"

namespace mlbfgs {

struct LossGrad {
    double loss = 0.0;
    FlatVector grad;
};

/// Unnormalized per-sample sums over part of a batch, combinable across
/// shards without changing any rounding.
struct BatchSums {
    double loss_sum = 0.0;
    FlatVector grad_sum;
    std::size_t count = 0;
};

/// A differentiable training objective. Two evaluation modes exist:
///
///  - sampled: the batch decomposes into per-sample terms. partial_eval sums
///    a contiguous slice of batch positions with pairwise association, so a
///    sharded evaluation combined shard-by-shard is bit-identical to the
///    single-process one. Regularization enters once, in finalize().
///
///  - replicated (sampled() == false): one stochastic gradient per iteration,
///    identical on every worker that passes the same per-iteration stream.
class Objective {
 public:
    virtual ~Objective() = default;

    virtual std::size_t dim() const = 0;
    virtual bool sampled() const = 0;
    virtual std::size_t data_size() const { return 0; }

    /// Deterministic reference loss (noise-free / full-data), for metrics and
    /// convergence checks.
    virtual double ref_loss(const FlatVector& theta) const = 0;

    /// Batch positions for one iteration; identical for every worker.
    virtual std::vector<std::size_t> draw_batch(RngStream& rng_iter, std::size_t batch) const;

    /// Sum of per-sample losses/gradients over batch positions [lo, hi).
    virtual BatchSums partial_eval(const FlatVector& theta, const std::vector<std::size_t>& batch,
                                   std::size_t lo, std::size_t hi) const;

    /// Mean the sums and apply regularization; every worker performs this on
    /// the identical reduced sums.
    LossGrad finalize(const FlatVector& theta, const BatchSums& sums) const;

    virtual LossGrad replicated_eval(const FlatVector& theta, RngStream rng_iter) const;

    /// Convenience: full batch evaluation in one call (the p = 1 path).
    LossGrad eval_batch(const FlatVector& theta, const std::vector<std::size_t>& batch) const;

 protected:
    virtual double reg_loss(const FlatVector&) const { return 0.0; }
    virtual void add_reg_grad(const FlatVector&, FlatVector&) const {}

    virtual LossGrad sample_eval(const FlatVector& theta, std::size_t index) const;
};

/// L(theta) = 0.5 theta' B theta + c' theta with symmetric positive-definite
/// B; stochastic gradients add i.i.d. N(0, noise_sigma^2) per coordinate.
/// The spectrum edges are recorded at construction.
class QuadraticObjective : public Objective {
 public:
    QuadraticObjective(Eigen::MatrixXd b, FlatVector linear_term, double noise_sigma);

    static QuadraticObjective identity(std::size_t d, double noise_sigma);
    static QuadraticObjective diagonal(const std::vector<double>& diag, double noise_sigma);
    /// Random SPD Hessian with eigenvalues spread over [lambda_min, lambda_max].
    static QuadraticObjective random_spd(RngStream& rng, std::size_t d, double lambda_min,
                                         double lambda_max, double noise_sigma);

    std::size_t dim() const override { return static_cast<std::size_t>(b_.rows()); }
    bool sampled() const override { return false; }
    double ref_loss(const FlatVector& theta) const override;
    LossGrad replicated_eval(const FlatVector& theta, RngStream rng_iter) const override;

    /// Noise-free gradient B theta + c.
    FlatVector exact_grad(const FlatVector& theta) const;
    /// Newton direction B^{-1} g.
    FlatVector solve(const FlatVector& g) const;

    double lambda_min() const { return lambda_min_; }
    double lambda_max() const { return lambda_max_; }
    double noise_sigma() const { return noise_sigma_; }
    const Eigen::MatrixXd& hessian() const { return b_; }

 private:
    Eigen::MatrixXd b_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    FlatVector c_;
    double noise_sigma_;
    double lambda_min_ = 0.0;
    double lambda_max_ = 0.0;
};

/// Binary logistic regression with bias and L2 penalty folded into the loss,
/// so curvature pairs see one consistent objective.
class LogisticObjective : public Objective {
 public:
    LogisticObjective(Dataset data, double weight_decay);

    std::size_t dim() const override { return data_.m + 1; }
    bool sampled() const override { return true; }
    std::size_t data_size() const override { return data_.n; }
    double ref_loss(const FlatVector& theta) const override;

    const Dataset& data() const { return data_; }
    double weight_decay() const { return wd_; }

 protected:
    double reg_loss(const FlatVector& theta) const override;
    void add_reg_grad(const FlatVector& theta, FlatVector& g) const override;
    LossGrad sample_eval(const FlatVector& theta, std::size_t index) const override;

 private:
    Dataset data_;
    double wd_;
};

/// Mean loss and gradient of logistic regression over explicit batch indices.
LossGrad logistic_loss_grad(const Dataset& data, const std::vector<std::size_t>& batch,
                            const FlatVector& theta, double weight_decay);

/// Central-difference gradient oracle: (f(x + h e_i) - f(x - h e_i)) / 2h.
FlatVector finite_diff_grad(const std::function<double(const FlatVector&)>& f,
                            const FlatVector& theta, double h = 1e-5);

}  // namespace mlbfgs
