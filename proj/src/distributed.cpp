#include "mlbfgs/distributed.hpp"

#include <cmath>
#include <stdexcept>

#include "mlbfgs/errors.hpp"
#include "mlbfgs/reduction.hpp"

namespace mlbfgs {

FlatVector allreduce_mean(const std::vector<FlatVector>& grads) {
    if (grads.empty()) throw std::invalid_argument("allreduce_mean: no inputs");
    for (const auto& g : grads) check_same_dim(g, grads.front(), "allreduce_mean");
    FlatVector sum = pairwise_reduce<FlatVector>(
        0, grads.size(), [&](std::size_t w) { return grads[w]; },
        [](FlatVector a, const FlatVector& b) {
            a.add(b);
            return a;
        });
    const double p = static_cast<double>(grads.size());
    for (std::size_t i = 0; i < sum.dim(); ++i) sum[i] = sum[i] / p;
    return sum;
}

WorkerSim::WorkerSim(std::size_t id, const BlockLayout& layout, const MlbfgsConfig& cfg,
                     const FlatVector& theta0, const FlatVector& grad0)
    : id_(id), owned_(layout.blocks_of_worker(id)), theta_(theta0) {
    states_.reserve(owned_.size());
    for (std::size_t b : owned_) {
        states_.emplace_back(cfg, block_view(theta0, layout, b), block_view(grad0, layout, b));
    }
}

void WorkerSim::step_owned(const BlockLayout& layout, const FlatVector& reduced_grad, long t,
                           double lr) {
    for (std::size_t i = 0; i < owned_.size(); ++i) {
        const std::size_t b = owned_[i];
        const auto& range = layout.range(b);
        FlatVector theta_blk = block_view(theta_, layout, b);
        FlatVector grad_blk = block_view(reduced_grad, layout, b);
        auto res = states_[i].step(theta_blk, grad_blk, t, lr);
        scatter_block(theta_, layout, b, res.theta_next);
        counters_.flops_opt += range.size();
        if (res.preconditioned) {
            counters_.flops_hessian += 2 * res.pairs_used * range.size();
        }
    }
    std::uint64_t live = 0;
    for (const auto& st : states_) live += st.history_elems();
    counters_.mem_history_elems = live;
}

void allgather_params(std::vector<WorkerSim>& workers, const BlockLayout& layout) {
    const std::size_t p = workers.size();
    if (p == 0) throw std::invalid_argument("allgather_params: no workers");
    if (p == 1) return;  // single replica: nothing to exchange

    // Every block travels from its owner to the p - 1 other replicas.
    for (std::size_t b = 0; b < layout.num_blocks(); ++b) {
        const std::size_t owner = layout.worker_of(b);
        FlatVector bits = block_view(workers[owner].theta(), layout, b);
        for (std::size_t w = 0; w < p; ++w) {
            if (w == owner) continue;
            scatter_block(workers[w].theta(), layout, b, bits);
        }
    }
    for (auto& w : workers) {
        w.add_allgather_bytes(static_cast<std::uint64_t>(p - 1) *
                              layout.owned_dims(w.id()) * sizeof(double));
    }

    for (std::size_t w = 1; w < p; ++w) {
        if (!(workers[w].theta() == workers[0].theta())) {
            throw SimulationIntegrityError("replica " + std::to_string(w) +
                                           " diverged after the parameter exchange");
        }
    }
}

DistributedRun::DistributedRun(std::shared_ptr<const Objective> objective, BlockLayout layout,
                               MlbfgsConfig cfg, FlatVector theta0, RngStream iter_root,
                               std::size_t batch_size)
    : objective_(std::move(objective)),
      layout_(std::move(layout)),
      cfg_(cfg),
      root_(iter_root),
      batch_size_(batch_size) {
    if (theta0.dim() != layout_.dim() || theta0.dim() != objective_->dim()) {
        throw DimensionMismatchError("DistributedRun: theta0 / layout / objective dims differ");
    }
    if (objective_->sampled() && batch_size_ < layout_.num_workers()) {
        throw std::invalid_argument("DistributedRun: batch smaller than worker count");
    }
    // t = 0 gradient initializes the averaged state on every block.
    LossGrad g0 = reduced_gradient(0, theta0);
    init_stats_ = {objective_->ref_loss(theta0), norm(g0.grad)};
    for (std::size_t w = 0; w < layout_.num_workers(); ++w) {
        workers_.emplace_back(w, layout_, cfg_, theta0, g0.grad);
    }
}

LossGrad DistributedRun::reduced_gradient(long t, const FlatVector& theta) {
    RngStream iter_rng = root_.split(static_cast<std::uint64_t>(t));
    const std::size_t p = layout_.num_workers();

    if (!objective_->sampled()) {
        // Replicated evaluation: every node draws the identical stochastic
        // gradient, so the mean equals each contribution for 2^k nodes.
        LossGrad one = objective_->replicated_eval(theta, iter_rng);
        std::vector<FlatVector> per_worker(p, one.grad);
        LossGrad out;
        out.loss = one.loss;
        out.grad = allreduce_mean(per_worker);
        return out;
    }

    // One canonical batch per iteration; workers take tree-aligned slices and
    // exchange unnormalized sums, so the reduced mean is worker-count-exact.
    std::vector<std::size_t> batch = objective_->draw_batch(iter_rng, batch_size_);
    auto shards = shard_ranges(batch.size(), p);
    std::vector<BatchSums> partials;
    partials.reserve(shards.size());
    for (auto [lo, hi] : shards) {
        partials.push_back(objective_->partial_eval(theta, batch, lo, hi));
    }
    BatchSums total = pairwise_reduce<BatchSums>(
        0, partials.size(), [&](std::size_t w) { return partials[w]; },
        [](BatchSums a, BatchSums b) {
            a.loss_sum += b.loss_sum;
            a.grad_sum.add(b.grad_sum);
            a.count += b.count;
            return a;
        });
    return objective_->finalize(theta, total);
}

DistStepStats DistributedRun::step(long t, double lr) {
    const std::size_t p = workers_.size();
    LossGrad lg = reduced_gradient(t, workers_.front().theta());

    if (p > 1) {
        // Ring-allreduce traffic model: reduce-scatter plus gather phases.
        const std::uint64_t seg = (layout_.dim() + p - 1) / p;
        for (auto& w : workers_) {
            w.add_allreduce_bytes(2 * static_cast<std::uint64_t>(p - 1) * seg * sizeof(double));
        }
    }
    for (auto& w : workers_) {
        w.step_owned(layout_, lg.grad, t, lr);
    }
    allgather_params(workers_, layout_);
    return {lg.loss, norm(lg.grad)};
}

std::vector<WorkerCounters> measured_costs(const std::vector<WorkerSim>& workers) {
    std::vector<WorkerCounters> out;
    out.reserve(workers.size());
    for (const auto& w : workers) out.push_back(w.counters());
    return out;
}

}  // namespace mlbfgs
