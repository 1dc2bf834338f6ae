#include "mlbfgs/objectives.hpp"

#include <cmath>
#include <stdexcept>

#include "mlbfgs/errors.hpp"
#include "mlbfgs/reduction.hpp"

namespace mlbfgs {

std::vector<std::size_t> Objective::draw_batch(RngStream& rng_iter, std::size_t batch) const {
    if (!sampled()) return {};
    if (batch == 0) throw std::invalid_argument("draw_batch: empty batch");
    const std::size_t n = data_size();
    std::vector<std::size_t> idx(batch);
    for (std::size_t i = 0; i < batch; ++i) idx[i] = rng_iter.next_u64() % n;
    return idx;
}

BatchSums Objective::partial_eval(const FlatVector& theta, const std::vector<std::size_t>& batch,
                                  std::size_t lo, std::size_t hi) const {
    if (!(lo < hi && hi <= batch.size())) {
        throw std::invalid_argument("partial_eval: bad position range");
    }
    return pairwise_reduce<BatchSums>(
        lo, hi,
        [&](std::size_t pos) {
            LossGrad one = sample_eval(theta, batch[pos]);
            return BatchSums{one.loss, std::move(one.grad), 1};
        },
        [](BatchSums a, BatchSums b) {
            a.loss_sum += b.loss_sum;
            a.grad_sum.add(b.grad_sum);
            a.count += b.count;
            return a;
        });
}

LossGrad Objective::finalize(const FlatVector& theta, const BatchSums& sums) const {
    if (sums.count == 0) throw std::invalid_argument("finalize: empty batch");
    const double n = static_cast<double>(sums.count);
    LossGrad out;
    out.loss = sums.loss_sum / n + reg_loss(theta);
    out.grad = FlatVector(sums.grad_sum.dim());
    for (std::size_t i = 0; i < out.grad.dim(); ++i) out.grad[i] = sums.grad_sum[i] / n;
    add_reg_grad(theta, out.grad);
    return out;
}

LossGrad Objective::replicated_eval(const FlatVector&, RngStream) const {
    throw std::logic_error("replicated_eval: objective is sample-decomposable");
}

LossGrad Objective::eval_batch(const FlatVector& theta,
                               const std::vector<std::size_t>& batch) const {
    if (batch.empty()) throw std::invalid_argument("eval_batch: empty batch");
    return finalize(theta, partial_eval(theta, batch, 0, batch.size()));
}

LossGrad Objective::sample_eval(const FlatVector&, std::size_t) const {
    throw std::logic_error("sample_eval: objective is not sample-decomposable");
}

// ---------------------------------------------------------------------------
// Quadratic

QuadraticObjective::QuadraticObjective(Eigen::MatrixXd b, FlatVector linear_term,
                                       double noise_sigma)
    : b_(std::move(b)), c_(std::move(linear_term)), noise_sigma_(noise_sigma) {
    if (b_.rows() != b_.cols()) throw std::invalid_argument("QuadraticObjective: B not square");
    if (noise_sigma_ < 0.0) throw std::invalid_argument("QuadraticObjective: negative noise");
    if (c_.dim() == 0) c_ = FlatVector(static_cast<std::size_t>(b_.rows()));
    if (static_cast<Eigen::Index>(c_.dim()) != b_.rows()) {
        throw DimensionMismatchError("QuadraticObjective: linear term dim mismatch");
    }
    const double asym = (b_ - b_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) {
        throw std::invalid_argument("QuadraticObjective: B asymmetric by " + std::to_string(asym));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b_, Eigen::EigenvaluesOnly);
    lambda_min_ = es.eigenvalues().minCoeff();
    lambda_max_ = es.eigenvalues().maxCoeff();
    if (!(lambda_min_ > 0.0)) {
        throw std::invalid_argument("QuadraticObjective: B not positive-definite");
    }
    llt_.compute(b_);
}

QuadraticObjective QuadraticObjective::identity(std::size_t d, double noise_sigma) {
    return QuadraticObjective(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                                        static_cast<Eigen::Index>(d)),
                              FlatVector(d), noise_sigma);
}

QuadraticObjective QuadraticObjective::diagonal(const std::vector<double>& diag,
                                                double noise_sigma) {
    const auto d = static_cast<Eigen::Index>(diag.size());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) b(i, i) = diag[static_cast<std::size_t>(i)];
    return QuadraticObjective(std::move(b), FlatVector(diag.size()), noise_sigma);
}

QuadraticObjective QuadraticObjective::random_spd(RngStream& rng, std::size_t d,
                                                  double lambda_min, double lambda_max,
                                                  double noise_sigma) {
    const auto di = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd g(di, di);
    for (Eigen::Index i = 0; i < di; ++i)
        for (Eigen::Index j = 0; j < di; ++j) g(i, j) = rng.next_gaussian();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd ev(di);
    // Pin both spectrum edges, spread the rest uniformly.
    for (Eigen::Index i = 0; i < di; ++i) {
        ev(i) = lambda_min + (lambda_max - lambda_min) * rng.next_unit();
    }
    ev(0) = lambda_min;
    if (di > 1) ev(di - 1) = lambda_max;
    Eigen::MatrixXd b = q * ev.asDiagonal() * q.transpose();
    b = 0.5 * (b + b.transpose()).eval();
    return QuadraticObjective(std::move(b), FlatVector(d), noise_sigma);
}

double QuadraticObjective::ref_loss(const FlatVector& theta) const {
    if (theta.dim() != dim()) throw DimensionMismatchError("QuadraticObjective: theta dim");
    Eigen::Map<const Eigen::VectorXd> t(theta.data(), b_.rows());
    Eigen::Map<const Eigen::VectorXd> c(c_.data(), b_.rows());
    return 0.5 * t.dot(b_ * t) + c.dot(t);
}

FlatVector QuadraticObjective::exact_grad(const FlatVector& theta) const {
    if (theta.dim() != dim()) throw DimensionMismatchError("QuadraticObjective: theta dim");
    Eigen::Map<const Eigen::VectorXd> t(theta.data(), b_.rows());
    Eigen::VectorXd g = b_ * t;
    FlatVector out(dim());
    for (std::size_t i = 0; i < dim(); ++i) out[i] = g(static_cast<Eigen::Index>(i)) + c_[i];
    return out;
}

FlatVector QuadraticObjective::solve(const FlatVector& g) const {
    if (g.dim() != dim()) throw DimensionMismatchError("QuadraticObjective: rhs dim");
    Eigen::Map<const Eigen::VectorXd> gm(g.data(), b_.rows());
    Eigen::VectorXd x = llt_.solve(gm);
    FlatVector out(dim());
    for (std::size_t i = 0; i < dim(); ++i) out[i] = x(static_cast<Eigen::Index>(i));
    return out;
}

LossGrad QuadraticObjective::replicated_eval(const FlatVector& theta, RngStream rng_iter) const {
    LossGrad out;
    out.loss = ref_loss(theta);
    out.grad = exact_grad(theta);
    if (noise_sigma_ > 0.0) {
        out.grad.add(rng_iter.gaussian_vector(dim(), noise_sigma_));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Logistic regression

LogisticObjective::LogisticObjective(Dataset data, double weight_decay)
    : data_(std::move(data)), wd_(weight_decay) {
    data_.validate();
    if (data_.classes != 2) {
        throw std::invalid_argument("LogisticObjective: needs binary labels");
    }
    if (wd_ < 0.0) throw std::invalid_argument("LogisticObjective: negative weight decay");
}

double LogisticObjective::reg_loss(const FlatVector& theta) const {
    return 0.5 * wd_ * squared_norm(theta);
}

void LogisticObjective::add_reg_grad(const FlatVector& theta, FlatVector& g) const {
    g.add_scaled(theta, wd_);
}

LossGrad LogisticObjective::sample_eval(const FlatVector& theta, std::size_t index) const {
    if (theta.dim() != dim()) throw DimensionMismatchError("LogisticObjective: theta dim");
    if (index >= data_.n) throw std::invalid_argument("LogisticObjective: sample index");
    const double* x = data_.row(index);
    const double y = static_cast<double>(data_.labels[index]);
    double z = theta[data_.m];  // bias
    for (std::size_t j = 0; j < data_.m; ++j) z += theta[j] * x[j];

    // log(1 + e^{-|z|}) keeps the loss stable for large |z|.
    const double p = 1.0 / (1.0 + std::exp(-z));
    const double softplus = std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0);
    LossGrad out;
    out.loss = softplus - y * z;
    out.grad = FlatVector(dim());
    const double r = p - y;
    for (std::size_t j = 0; j < data_.m; ++j) out.grad[j] = r * x[j];
    out.grad[data_.m] = r;
    return out;
}

double LogisticObjective::ref_loss(const FlatVector& theta) const {
    std::vector<std::size_t> all(data_.n);
    for (std::size_t i = 0; i < data_.n; ++i) all[i] = i;
    return eval_batch(theta, all).loss;
}

LossGrad logistic_loss_grad(const Dataset& data, const std::vector<std::size_t>& batch,
                            const FlatVector& theta, double weight_decay) {
    LogisticObjective obj(data, weight_decay);
    return obj.eval_batch(theta, batch);
}

// ---------------------------------------------------------------------------

FlatVector finite_diff_grad(const std::function<double(const FlatVector&)>& f,
                            const FlatVector& theta, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be positive");
    FlatVector g(theta.dim());
    FlatVector probe = theta;
    for (std::size_t i = 0; i < theta.dim(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + h;
        const double up = f(probe);
        probe[i] = orig - h;
        const double down = f(probe);
        probe[i] = orig;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

}  // namespace mlbfgs
