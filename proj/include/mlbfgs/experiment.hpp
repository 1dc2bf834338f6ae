#pragma once

#include <map>
#include <string>
#include <vector>

#include "mlbfgs/metrics.hpp"
#include "mlbfgs/run_config.hpp"

namespace mlbfgs {

struct RunResult {
    std::vector<MetricsRow> rows;
    std::string csv_path;
    bool diverged = false;
    FlatVector final_theta;
};

/// Execute one configured run to its budget and write metrics.csv plus the
/// resolved config.json under out_dir. Runs that hit NaN or a loss above
/// 1e12 stop early behind a final row flagged "diverged".
RunResult run_experiment(const RunConfig& cfg, const std::string& out_dir);

/// Gradient used at iteration t of a single-process run: replicated draw or
/// a sampled batch, keyed by iter_root.split(t). This is arithmetic-identical
/// to what the distributed path reduces to.
LossGrad eval_iteration(const Objective& obj, const FlatVector& theta, const RngStream& iter_root,
                        long t, std::size_t batch);

struct Fig1Summary {
    // Seed-averaged loss at the final iteration; non-finite runs count as 1e12.
    double sgd = 0.0;
    double vanilla = 0.0;
    double momentum = 0.0;
    double newton = 0.0;
};

/// Shared-seed comparison of SGD, raw-pair L-BFGS, momentum-averaged L-BFGS
/// and the exact second-order step on the 2-d noisy quadratic; one CSV row
/// per (method, seed, iteration).
Fig1Summary fig1_trajectories(double sigma, double beta, long iters, int seeds,
                              const std::string& out_path);

struct AblationStats {
    double mean_loss_at_checkpoint = 0.0;   // non-finite runs count as +inf
    // Variance of one-step loss changes over the final 100 iterations; a
    // smooth descent scores low, a jagged or exploding tail scores high.
    double mean_tail_fluctuation = 0.0;
    double mean_final_loss = 0.0;
};

struct AblationSummary {
    std::map<std::string, AblationStats> variants;
    /// block count -> seed-averaged final loss (runs only when the block
    /// sweep applies to the configured objective).
    std::map<std::size_t, double> block_sweep_final_loss;
};

/// Four shared-seed variants of the block L-BFGS rule (averaging and damping
/// toggled independently), plus an optional sweep over {1, 2, 4} blocks.
/// checkpoint_iter selects the comparison iteration (0 = final).
AblationSummary ablation_run(const RunConfig& cfg, const std::string& out_dir, int seeds = 10,
                             long checkpoint_iter = 200);

/// Evaluate the per-node cost table for one optimizer or "all"; writes a CSV
/// and returns the rows.
std::vector<std::pair<std::string, CostRow>> cost_report(const std::string& kind,
                                                         const CostModelInputs& inputs,
                                                         const std::string& out_path);

}  // namespace mlbfgs
