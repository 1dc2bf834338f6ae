#pragma once

#include <vector>

#include "mlbfgs/dataset.hpp"
#include "mlbfgs/objectives.hpp"

namespace mlbfgs {

enum class Activation { Tanh, Relu };

/// Fully-connected network: widths[0] inputs through hidden layers to
/// widths.back() logits, softmax cross-entropy loss, optional L2 penalty
/// folded into the loss. Parameters are packed layer by layer, weight matrix
/// (row-major, out x in) then bias.
struct MlpSpec {
    std::vector<std::size_t> widths;
    Activation activation = Activation::Tanh;
    double weight_decay = 0.0;

    void validate() const;
    std::size_t num_layers() const { return widths.size() - 1; }
    std::size_t param_count() const;
    /// Offset of layer l's weight block; biases follow the weights.
    std::size_t weight_offset(std::size_t layer) const;
    std::size_t bias_offset(std::size_t layer) const;
};

/// Per-layer uniform init on [-1/sqrt(fan_in), +1/sqrt(fan_in)], weights then
/// bias, drawn in packing order from the stream.
FlatVector init_mlp_params(const MlpSpec& spec, RngStream& rng);

/// Mean cross-entropy (+ L2) and full gradient over an explicit batch given
/// as row-major features and labels.
LossGrad mlp_loss_grad(const MlpSpec& spec, const FlatVector& params,
                       const std::vector<double>& features, const std::vector<int>& labels);

class MlpObjective : public Objective {
 public:
    MlpObjective(Dataset data, MlpSpec spec);

    std::size_t dim() const override { return spec_.param_count(); }
    bool sampled() const override { return true; }
    std::size_t data_size() const override { return data_.n; }
    double ref_loss(const FlatVector& params) const override;

    const MlpSpec& spec() const { return spec_; }
    const Dataset& data() const { return data_; }

    /// Fraction of dataset rows whose argmax logit matches the label.
    double accuracy(const FlatVector& params) const;

 protected:
    double reg_loss(const FlatVector& params) const override;
    void add_reg_grad(const FlatVector& params, FlatVector& g) const override;
    LossGrad sample_eval(const FlatVector& params, std::size_t index) const override;

 private:
    Dataset data_;
    MlpSpec spec_;
};

}  // namespace mlbfgs
