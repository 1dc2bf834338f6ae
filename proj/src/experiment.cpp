#include "mlbfgs/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "mlbfgs/distributed.hpp"
#include "mlbfgs/errors.hpp"

namespace mlbfgs {

namespace {

constexpr double kDivergenceCap = 1e12;

bool blew_up(double loss) { return !std::isfinite(loss) || loss > kDivergenceCap; }

double capped(double loss) { return std::isfinite(loss) ? std::min(loss, kDivergenceCap) : kDivergenceCap; }

long epoch_of(const Objective& obj, long t, std::size_t batch) {
    if (!obj.sampled() || obj.data_size() == 0) return 0;
    return static_cast<long>((static_cast<std::size_t>(t) * batch) / obj.data_size());
}

class WallTimer {
 public:
    explicit WallTimer(bool enabled) : enabled_(enabled) {
        if (enabled_) start_ = std::chrono::steady_clock::now();
    }
    double elapsed_ms() const {
        if (!enabled_) return 0.0;
        auto now = std::chrono::steady_clock::now();
        return std::chrono::duration<double, std::milli>(now - start_).count();
    }

 private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

LossGrad eval_iteration(const Objective& obj, const FlatVector& theta, const RngStream& iter_root,
                        long t, std::size_t batch) {
    RngStream r = iter_root.split(static_cast<std::uint64_t>(t));
    if (!obj.sampled()) return obj.replicated_eval(theta, r);
    auto idx = obj.draw_batch(r, batch);
    return obj.eval_batch(theta, idx);
}

RunResult run_experiment(const RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    auto obj = build_objective(cfg);
    FlatVector theta = initial_theta(cfg, *obj);
    Schedule sched = cfg.schedule.to_schedule();
    RngStream iter_root = RngStream(cfg.seed).split(kIterStream);
    WallTimer timer(cfg.record_wall_time);

    RunResult result;
    auto emit_row = [&](long t, const std::string& split, double loss, double gnorm, double lr) {
        result.rows.push_back({t, epoch_of(*obj, t, cfg.batch_size), split, loss, gnorm, lr,
                               timer.elapsed_ms()});
    };

    const std::string& okind = cfg.optimizer.kind;
    if (okind == "mlbfgs") {
        BlockLayout layout = build_layout(cfg, obj->dim());
        DistributedRun run(obj, layout, cfg.optimizer.to_mlbfgs(), theta, iter_root,
                           cfg.batch_size);
        emit_row(0, "train", obj->ref_loss(theta), run.initial_stats().grad_norm, sched.at(0));
        for (long t = 1; t <= cfg.iterations; ++t) {
            const double lr = sched.at(t - 1);
            auto stats = run.step(t, lr);
            const double loss = obj->ref_loss(run.theta());
            if (blew_up(loss)) {
                emit_row(t, "diverged", loss, stats.grad_norm, lr);
                result.diverged = true;
                break;
            }
            emit_row(t, "train", loss, stats.grad_norm, lr);
        }
        result.final_theta = run.theta();
    } else {
        LossGrad g0 = eval_iteration(*obj, theta, iter_root, 0, cfg.batch_size);
        emit_row(0, "train", obj->ref_loss(theta), norm(g0.grad), sched.at(0));

        SgdOptimizer sgd(obj->dim(), cfg.optimizer.momentum);
        AdamOptimizer adam(obj->dim(), cfg.optimizer.beta1, cfg.optimizer.beta2,
                           cfg.optimizer.eps);
        VanillaLbfgsOptimizer lbfgs(cfg.optimizer.history, cfg.optimizer.to_filter());
        const auto* quad = dynamic_cast<const QuadraticObjective*>(obj.get());

        for (long t = 1; t <= cfg.iterations; ++t) {
            const double lr = sched.at(t - 1);
            LossGrad lg = eval_iteration(*obj, theta, iter_root, t, cfg.batch_size);
            if (okind == "sgd") {
                theta = sgd.step(theta, lg.grad, lr);
            } else if (okind == "adam") {
                theta = adam.step(theta, lg.grad, lr);
            } else if (okind == "lbfgs") {
                theta = lbfgs.step(theta, lg.grad, lr);
            } else {  // newton (validated to quadratic objectives)
                theta = newton_step_quadratic(theta, lg.grad, *quad);
            }
            const double loss = theta.all_finite() ? obj->ref_loss(theta)
                                                   : std::numeric_limits<double>::quiet_NaN();
            if (blew_up(loss)) {
                emit_row(t, "diverged", loss, norm(lg.grad), lr);
                result.diverged = true;
                break;
            }
            emit_row(t, "train", loss, norm(lg.grad), lr);
        }
        result.final_theta = theta;
    }

    std::filesystem::create_directories(out_dir);
    result.csv_path = (std::filesystem::path(out_dir) / "metrics.csv").string();
    write_metrics_csv(result.csv_path, result.rows);
    std::ofstream cfg_out(std::filesystem::path(out_dir) / "config.json", std::ios::binary);
    cfg_out << emit_run_config(cfg);
    return result;
}

// ---------------------------------------------------------------------------

Fig1Summary fig1_trajectories(double sigma, double beta, long iters, int seeds,
                              const std::string& out_path) {
    if (sigma < 0.0) throw ConfigError("sigma", "must be non-negative");
    if (seeds < 1) throw ConfigError("seeds", "need at least one seed");

    auto obj = std::make_shared<QuadraticObjective>(QuadraticObjective::identity(2, sigma));
    const FlatVector theta0(std::vector<double>{-2.5, 2.0});
    // Rates follow a per-setting tuning protocol. Noise-free runs take full
    // quasi-Newton steps; under noise both history-based methods share a rate
    // that keeps the run's curvature windows signal-bearing across the
    // horizon. The averaged variant uses the [0.5, 1.5] damping band: the
    // wide default band admits near-zero curvature ratios whose 1/(s'y)
    // weights blow the implicit model up once windows shrink to noise scale.
    const double lr_sgd = 0.1;
    const double lr_lbfgs = sigma == 0.0 ? 1.0 : 0.04;

    MlbfgsConfig mcfg;
    mcfg.update_period = 10;
    mcfg.history = 10;
    mcfg.beta = beta;
    mcfg.step_momentum = 0.0;
    mcfg.damping = {0.5, 1.5, 0.99};

    std::filesystem::path out(out_path);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    std::ofstream csv(out, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + out_path);
    csv << "method,seed,iter,theta0,theta1,loss\n";

    auto emit = [&](const std::string& method, int seed, long t, const FlatVector& th) {
        csv << method << ',' << seed << ',' << t << ',' << format_double(th[0]) << ','
            << format_double(th[1]) << ',' << format_double(obj->ref_loss(th)) << "\n";
    };

    Fig1Summary sum;
    for (int seed = 0; seed < seeds; ++seed) {
        RngStream iter_root = RngStream(static_cast<std::uint64_t>(seed)).split(kIterStream);
        auto grad_at = [&](const FlatVector& th, long t) {
            return eval_iteration(*obj, th, iter_root, t, 1).grad;
        };

        // All four methods consume the same per-iteration noise stream.
        FlatVector th_sgd = theta0, th_van = theta0, th_mom = theta0, th_new = theta0;
        SgdOptimizer sgd(2, 0.0);
        VanillaLbfgsOptimizer vanilla(mcfg.history);
        MlbfgsBlockOptimizer momentum(mcfg, theta0, grad_at(theta0, 0));

        emit("sgd", seed, 0, th_sgd);
        emit("vanilla_lbfgs", seed, 0, th_van);
        emit("momentum_lbfgs", seed, 0, th_mom);
        emit("newton", seed, 0, th_new);
        for (long t = 1; t <= iters; ++t) {
            th_sgd = sgd.step(th_sgd, grad_at(th_sgd, t), lr_sgd);
            if (th_van.all_finite()) {
                th_van = vanilla.step(th_van, grad_at(th_van, t), lr_lbfgs);
            }
            th_mom = momentum.step(th_mom, grad_at(th_mom, t), t, lr_lbfgs).theta_next;
            th_new = newton_step_quadratic(th_new, grad_at(th_new, t), *obj);
            emit("sgd", seed, t, th_sgd);
            emit("vanilla_lbfgs", seed, t, th_van);
            emit("momentum_lbfgs", seed, t, th_mom);
            emit("newton", seed, t, th_new);
        }
        sum.sgd += capped(obj->ref_loss(th_sgd));
        sum.vanilla += th_van.all_finite() ? capped(obj->ref_loss(th_van)) : kDivergenceCap;
        sum.momentum += capped(obj->ref_loss(th_mom));
        sum.newton += capped(obj->ref_loss(th_new));
    }
    sum.sgd /= seeds;
    sum.vanilla /= seeds;
    sum.momentum /= seeds;
    sum.newton /= seeds;
    return sum;
}

// ---------------------------------------------------------------------------

namespace {

struct SeriesStats {
    std::vector<double> losses;  // may stop early on blow-up

    double at_or_inf(long t) const {
        if (t < 0 || static_cast<std::size_t>(t) >= losses.size() ||
            !std::isfinite(losses[static_cast<std::size_t>(t)])) {
            return std::numeric_limits<double>::infinity();
        }
        return losses[static_cast<std::size_t>(t)];
    }

    // Fluctuation of the loss sequence over the final `window` iterations,
    // measured on one-step differences so a smooth descent trend does not
    // register as instability.
    double tail_fluctuation(std::size_t window) const {
        if (losses.size() < window + 1) return std::numeric_limits<double>::infinity();
        std::vector<double> diffs;
        for (std::size_t i = losses.size() - window; i < losses.size(); ++i) {
            if (!std::isfinite(losses[i]) || !std::isfinite(losses[i - 1])) {
                return std::numeric_limits<double>::infinity();
            }
            diffs.push_back(losses[i] - losses[i - 1]);
        }
        double mean = 0.0;
        for (double d : diffs) mean += d;
        mean /= static_cast<double>(diffs.size());
        double var = 0.0;
        for (double d : diffs) var += (d - mean) * (d - mean);
        return var / static_cast<double>(diffs.size());
    }
};

SeriesStats run_mlbfgs_series(const RunConfig& cfg) {
    auto obj = build_objective(cfg);
    FlatVector theta = initial_theta(cfg, *obj);
    Schedule sched = cfg.schedule.to_schedule();
    RngStream iter_root = RngStream(cfg.seed).split(kIterStream);
    BlockLayout layout = build_layout(cfg, obj->dim());
    DistributedRun run(obj, layout, cfg.optimizer.to_mlbfgs(), theta, iter_root, cfg.batch_size);

    SeriesStats out;
    out.losses.push_back(obj->ref_loss(theta));
    for (long t = 1; t <= cfg.iterations; ++t) {
        run.step(t, sched.at(t - 1));
        if (!run.theta().all_finite()) {
            out.losses.push_back(std::numeric_limits<double>::quiet_NaN());
            break;
        }
        const double loss = obj->ref_loss(run.theta());
        out.losses.push_back(loss);
        if (!std::isfinite(loss) || loss > kDivergenceCap) break;
    }
    return out;
}

}  // namespace

AblationSummary ablation_run(const RunConfig& cfg, const std::string& out_dir, int seeds,
                             long checkpoint_iter) {
    if (cfg.optimizer.kind != "mlbfgs") {
        throw ConfigError("optimizer.kind", "ablation applies to the mlbfgs optimizer");
    }
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(std::filesystem::path(out_dir) / "ablation.csv", std::ios::binary);
    csv << "variant,seed,iter,loss\n";

    const std::vector<std::pair<std::string, std::pair<bool, bool>>> variants = {
        {"both", {true, true}},            // averaging + damping
        {"momentum_only", {true, false}},  // averaging, raw pushes
        {"damping_only", {false, true}},   // raw window diffs, damped
        {"neither", {false, false}},
    };
    if (checkpoint_iter <= 0 || checkpoint_iter > cfg.iterations) {
        checkpoint_iter = cfg.iterations;
    }

    AblationSummary summary;
    for (const auto& [name, toggles] : variants) {
        RunConfig vcfg = cfg;
        if (!toggles.first) vcfg.optimizer.beta = 0.0;  // averaging off
        vcfg.optimizer.use_damping = toggles.second;
        AblationStats stats;
        for (int s = 0; s < seeds; ++s) {
            vcfg.seed = cfg.seed + static_cast<std::uint64_t>(s);
            SeriesStats series = run_mlbfgs_series(vcfg);
            for (std::size_t t = 0; t < series.losses.size(); ++t) {
                csv << name << ',' << vcfg.seed << ',' << t << ','
                    << format_double(series.losses[t]) << "\n";
            }
            stats.mean_loss_at_checkpoint += series.at_or_inf(checkpoint_iter);
            stats.mean_tail_fluctuation += series.tail_fluctuation(100);
            stats.mean_final_loss += series.at_or_inf(cfg.iterations);
        }
        stats.mean_loss_at_checkpoint /= seeds;
        stats.mean_tail_fluctuation /= seeds;
        stats.mean_final_loss /= seeds;
        summary.variants[name] = stats;
    }

    // Block-granularity sweep on the full variant when the dimension splits.
    auto obj_probe = build_objective(cfg);
    const std::size_t dim = obj_probe->dim();
    if (dim >= 4) {
        std::ofstream bcsv(std::filesystem::path(out_dir) / "ablation_blocks.csv",
                           std::ios::binary);
        bcsv << "blocks,seed,final_loss\n";
        for (std::size_t blocks : {1u, 2u, 4u}) {
            RunConfig bcfg = cfg;
            bcfg.blocks.count = blocks;
            double acc = 0.0;
            for (int s = 0; s < seeds; ++s) {
                bcfg.seed = cfg.seed + static_cast<std::uint64_t>(s);
                SeriesStats series = run_mlbfgs_series(bcfg);
                const double final_loss = series.at_or_inf(cfg.iterations);
                bcsv << blocks << ',' << bcfg.seed << ',' << format_double(final_loss) << "\n";
                acc += final_loss;
            }
            summary.block_sweep_final_loss[blocks] = acc / seeds;
        }
    }
    return summary;
}

// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, CostRow>> cost_report(const std::string& kind,
                                                         const CostModelInputs& inputs,
                                                         const std::string& out_path) {
    std::vector<std::string> kinds;
    if (kind == "all") {
        kinds = {"sgd", "kfac", "slbfgs", "mlbfgs"};
    } else {
        kinds = {kind};
    }
    std::vector<std::pair<std::string, CostRow>> rows;
    for (const auto& k : kinds) {
        try {
            rows.emplace_back(k, analytic_cost(cost_kind_from_string(k), inputs));
        } catch (const ConfigError&) {
            if (kind != "all") throw;  // explicit request: surface the error
        }
    }
    std::filesystem::path out(out_path);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    std::ofstream csv(out, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + out_path);
    csv << "optimizer,fwd_bwd_compute,opt_compute,fwd_bwd_memory,opt_memory\n";
    for (const auto& [name, row] : rows) {
        csv << name << ',' << format_double(row.fwd_bwd_compute) << ','
            << format_double(row.opt_compute) << ',' << format_double(row.fwd_bwd_memory) << ','
            << format_double(row.opt_memory) << "\n";
    }
    return rows;
}

}  // namespace mlbfgs
