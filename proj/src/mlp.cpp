#include "mlbfgs/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "mlbfgs/errors.hpp"

namespace mlbfgs {

void MlpSpec::validate() const {
    if (widths.size() < 2) throw std::invalid_argument("MlpSpec: need at least two layers");
    for (std::size_t w : widths) {
        if (w == 0) throw std::invalid_argument("MlpSpec: zero-width layer");
    }
    if (weight_decay < 0.0) throw std::invalid_argument("MlpSpec: negative weight decay");
}

std::size_t MlpSpec::param_count() const {
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        total += widths[l + 1] * widths[l] + widths[l + 1];
    }
    return total;
}

std::size_t MlpSpec::weight_offset(std::size_t layer) const {
    std::size_t at = 0;
    for (std::size_t l = 0; l < layer; ++l) {
        at += widths[l + 1] * widths[l] + widths[l + 1];
    }
    return at;
}

std::size_t MlpSpec::bias_offset(std::size_t layer) const {
    return weight_offset(layer) + widths[layer + 1] * widths[layer];
}

FlatVector init_mlp_params(const MlpSpec& spec, RngStream& rng) {
    spec.validate();
    FlatVector params(spec.param_count());
    std::size_t at = 0;
    for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(spec.widths[l]));
        const std::size_t block = spec.widths[l + 1] * spec.widths[l] + spec.widths[l + 1];
        for (std::size_t i = 0; i < block; ++i) {
            params[at++] = bound * (2.0 * rng.next_unit() - 1.0);
        }
    }
    return params;
}

namespace {

double activate(double x, Activation act) {
    return act == Activation::Tanh ? std::tanh(x) : (x > 0.0 ? x : 0.0);
}

// Derivative expressed through the post-activation value.
double activate_grad(double a, Activation act) {
    return act == Activation::Tanh ? 1.0 - a * a : (a > 0.0 ? 1.0 : 0.0);
}

// Forward and backward for a single sample; the gradient contribution is
// accumulated into grad (same packing as params).
double sample_forward_backward(const MlpSpec& spec, const FlatVector& params, const double* x,
                               int label, FlatVector* grad) {
    const std::size_t layers = spec.num_layers();
    std::vector<std::vector<double>> acts(layers + 1);
    acts[0].assign(x, x + spec.widths[0]);

    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = spec.widths[l];
        const std::size_t out = spec.widths[l + 1];
        const std::size_t woff = spec.weight_offset(l);
        const std::size_t boff = spec.bias_offset(l);
        acts[l + 1].resize(out);
        for (std::size_t r = 0; r < out; ++r) {
            double z = params[boff + r];
            const std::size_t row = woff + r * in;
            for (std::size_t cidx = 0; cidx < in; ++cidx) z += params[row + cidx] * acts[l][cidx];
            acts[l + 1][r] = (l + 1 == layers) ? z : activate(z, spec.activation);
        }
    }

    // Softmax cross-entropy on the logits.
    const std::vector<double>& logits = acts[layers];
    const std::size_t classes = logits.size();
    double zmax = logits[0];
    for (double z : logits) zmax = std::max(zmax, z);
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - zmax);
    const double loss = std::log(sum) + zmax - logits[static_cast<std::size_t>(label)];

    if (grad == nullptr) return loss;

    std::vector<double> delta(classes);
    for (std::size_t k = 0; k < classes; ++k) {
        delta[k] = std::exp(logits[k] - zmax) / sum - (static_cast<std::size_t>(label) == k);
    }

    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t in = spec.widths[l];
        const std::size_t out = spec.widths[l + 1];
        const std::size_t woff = spec.weight_offset(l);
        const std::size_t boff = spec.bias_offset(l);
        std::vector<double> prev_delta(in, 0.0);
        for (std::size_t r = 0; r < out; ++r) {
            const std::size_t row = woff + r * in;
            for (std::size_t cidx = 0; cidx < in; ++cidx) {
                (*grad)[row + cidx] += delta[r] * acts[l][cidx];
                prev_delta[cidx] += params[row + cidx] * delta[r];
            }
            (*grad)[boff + r] += delta[r];
        }
        if (l > 0) {
            for (std::size_t cidx = 0; cidx < in; ++cidx) {
                prev_delta[cidx] *= activate_grad(acts[l][cidx], spec.activation);
            }
            delta = std::move(prev_delta);
        }
    }
    return loss;
}

}  // namespace

LossGrad mlp_loss_grad(const MlpSpec& spec, const FlatVector& params,
                       const std::vector<double>& features, const std::vector<int>& labels) {
    spec.validate();
    if (params.dim() != spec.param_count()) {
        throw DimensionMismatchError("mlp_loss_grad: parameter count mismatch");
    }
    if (labels.empty() || features.size() != labels.size() * spec.widths[0]) {
        throw DimensionMismatchError("mlp_loss_grad: batch shape mismatch");
    }
    Dataset ds;
    ds.n = labels.size();
    ds.m = spec.widths[0];
    ds.classes = spec.widths.back();
    ds.features = features;
    ds.labels = labels;
    MlpObjective obj(std::move(ds), spec);
    std::vector<std::size_t> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return obj.eval_batch(params, all);
}

MlpObjective::MlpObjective(Dataset data, MlpSpec spec)
    : data_(std::move(data)), spec_(std::move(spec)) {
    spec_.validate();
    data_.validate();
    if (spec_.widths[0] != data_.m) {
        throw DimensionMismatchError("MlpObjective: input width vs feature dim");
    }
    if (spec_.widths.back() != data_.classes) {
        throw DimensionMismatchError("MlpObjective: output width vs class count");
    }
}

double MlpObjective::reg_loss(const FlatVector& params) const {
    return 0.5 * spec_.weight_decay * squared_norm(params);
}

void MlpObjective::add_reg_grad(const FlatVector& params, FlatVector& g) const {
    g.add_scaled(params, spec_.weight_decay);
}

LossGrad MlpObjective::sample_eval(const FlatVector& params, std::size_t index) const {
    if (params.dim() != dim()) throw DimensionMismatchError("MlpObjective: params dim");
    LossGrad out;
    out.grad = FlatVector(dim());
    out.loss = sample_forward_backward(spec_, params, data_.row(index), data_.labels[index],
                                       &out.grad);
    return out;
}

double MlpObjective::ref_loss(const FlatVector& params) const {
    std::vector<std::size_t> all(data_.n);
    for (std::size_t i = 0; i < data_.n; ++i) all[i] = i;
    return eval_batch(params, all).loss;
}

double MlpObjective::accuracy(const FlatVector& params) const {
    const std::size_t layers = spec_.num_layers();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data_.n; ++i) {
        std::vector<double> act(data_.row(i), data_.row(i) + data_.m);
        for (std::size_t l = 0; l < layers; ++l) {
            const std::size_t in = spec_.widths[l];
            const std::size_t out = spec_.widths[l + 1];
            const std::size_t woff = spec_.weight_offset(l);
            const std::size_t boff = spec_.bias_offset(l);
            std::vector<double> next(out);
            for (std::size_t r = 0; r < out; ++r) {
                double z = params[boff + r];
                for (std::size_t c = 0; c < in; ++c) z += params[woff + r * in + c] * act[c];
                next[r] = (l + 1 == layers) ? z : activate(z, spec_.activation);
            }
            act = std::move(next);
        }
        std::size_t best = 0;
        for (std::size_t k = 1; k < act.size(); ++k) {
            if (act[k] > act[best]) best = k;
        }
        if (static_cast<int>(best) == data_.labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data_.n);
}

}  // namespace mlbfgs
