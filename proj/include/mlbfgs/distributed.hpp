#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mlbfgs/block_layout.hpp"
#include "mlbfgs/objectives.hpp"
#include "mlbfgs/optimizers.hpp"
#include "mlbfgs/rng.hpp"

namespace mlbfgs {

/// Element-wise mean of per-worker vectors. Summation walks worker ids in
/// ascending order with pairwise association (the same tree the shard sums
/// use), so re-running with a different worker count cannot change the
/// arithmetic of an equivalent reduction.
FlatVector allreduce_mean(const std::vector<FlatVector>& grads);

/// Per-node cost counters. mem_history_elems tracks the live curvature
/// storage (2 * pairs * block dim over owned blocks); the rest accumulate.
struct WorkerCounters {
    std::uint64_t flops_hessian = 0;
    std::uint64_t flops_opt = 0;
    std::uint64_t mem_history_elems = 0;
    std::uint64_t bytes_allgather = 0;
    std::uint64_t bytes_allreduce = 0;
};

/// One simulated data-parallel node: a full parameter replica, the optimizer
/// state for its assigned blocks only, and cost counters.
class WorkerSim {
 public:
    WorkerSim(std::size_t id, const BlockLayout& layout, const MlbfgsConfig& cfg,
              const FlatVector& theta0, const FlatVector& grad0);

    std::size_t id() const { return id_; }
    const FlatVector& theta() const { return theta_; }
    FlatVector& theta() { return theta_; }
    const std::vector<std::size_t>& owned_blocks() const { return owned_; }
    const WorkerCounters& counters() const { return counters_; }
    const MlbfgsBlockOptimizer& block_state(std::size_t i) const { return states_[i]; }

    /// Advance this worker's owned blocks given the reduced gradient.
    void step_owned(const BlockLayout& layout, const FlatVector& reduced_grad, long t, double lr);

    void add_allreduce_bytes(std::uint64_t b) { counters_.bytes_allreduce += b; }
    void add_allgather_bytes(std::uint64_t b) { counters_.bytes_allgather += b; }

 private:
    std::size_t id_;
    std::vector<std::size_t> owned_;
    std::vector<MlbfgsBlockOptimizer> states_;
    FlatVector theta_;
    WorkerCounters counters_;
};

/// Copy every block from its owner into all replicas, count the traffic, and
/// fail loudly if replicas disagree afterwards.
void allgather_params(std::vector<WorkerSim>& workers, const BlockLayout& layout);

struct DistStepStats {
    double loss = 0.0;
    double grad_norm = 0.0;
};

/// Deterministic single-process simulation of data-parallel training with
/// block-assigned curvature state. Workers advance between two collective
/// points (gradient All-Reduce, parameter All-Gather); batches and noise are
/// keyed by iteration so the trajectory is independent of the worker count.
class DistributedRun {
 public:
    DistributedRun(std::shared_ptr<const Objective> objective, BlockLayout layout,
                   MlbfgsConfig cfg, FlatVector theta0, RngStream iter_root,
                   std::size_t batch_size);

    /// One iteration (t >= 1): gradient, reduce, block steps, gather.
    DistStepStats step(long t, double lr);

    const FlatVector& theta() const { return workers_.front().theta(); }
    const std::vector<WorkerSim>& workers() const { return workers_; }
    std::size_t num_workers() const { return workers_.size(); }
    /// Loss/gradient evaluated the same way iteration 0 sees it.
    DistStepStats initial_stats() const { return init_stats_; }

 private:
    LossGrad reduced_gradient(long t, const FlatVector& theta);

    std::shared_ptr<const Objective> objective_;
    BlockLayout layout_;
    MlbfgsConfig cfg_;
    RngStream root_;  // iteration stream: split(t) keys iteration t
    std::size_t batch_size_;
    std::vector<WorkerSim> workers_;
    DistStepStats init_stats_;
};

/// Per-node counter snapshot. History memory equals 2M * (owned dims) once
/// buffers are full; flop counters follow the same unit convention as the
/// analytic model.
std::vector<WorkerCounters> measured_costs(const std::vector<WorkerSim>& workers);

}  // namespace mlbfgs
