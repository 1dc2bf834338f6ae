// Acceptance suite: one pass/fail line per criterion, pinned tolerances.
// Each criterion is independent; the binary exits nonzero if any fail.

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "mlbfgs/damping.hpp"
#include "mlbfgs/dense_oracle.hpp"
#include "mlbfgs/distributed.hpp"
#include "mlbfgs/experiment.hpp"
#include "mlbfgs/history_buffer.hpp"
#include "mlbfgs/mlp.hpp"
#include "mlbfgs/objectives.hpp"
#include "mlbfgs/run_config.hpp"
#include "mlbfgs/verify.hpp"

using namespace mlbfgs;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, what.c_str());
    if (!pass) ++failures;
}

std::string out_dir(const std::string& leaf) {
    auto p = std::filesystem::path("acceptance_out") / leaf;
    std::filesystem::create_directories(p);
    return p.string();
}

char buf[512];

// ---------------------------------------------------------------------- 1

void criterion_1() {
    auto sum = fig1_trajectories(0.2, 0.9, 100, 20, out_dir("fig1") + "/fig1.csv");
    const bool ordering = sum.momentum < sum.vanilla;
    const bool near_newton = sum.momentum <= 3.0 * sum.newton;
    std::snprintf(buf, sizeof(buf),
                  "noisy-quadratic comparison: momentum %.4g < vanilla %.4g (%s) and within 3x "
                  "of newton %.4g (%s)",
                  sum.momentum, sum.vanilla, ordering ? "yes" : "no", sum.newton,
                  near_newton ? "yes" : "no");
    report(1, ordering && near_newton, buf);
}

// ---------------------------------------------------------------------- 2

void criterion_2() {
    bool pass = true;
    double worst_rel = 0.0;
    for (double beta : {0.9, 0.99, 0.999}) {
        auto rep = verify_lemma1(beta, 1.0, 100000, 10000, 42);
        pass = pass && rep.all_pass();
        for (const auto& c : rep.checks) {
            if (c.name == "ema_noise_variance") {
                worst_rel = std::max(worst_rel, std::abs(c.measured - c.expected) / c.expected);
            }
        }
    }
    std::snprintf(buf, sizeof(buf),
                  "averaged-gradient noise variance within 10%% of (1-b)/(1+b) eps^2 for b in "
                  "{0.9, 0.99, 0.999} (worst rel err %.3g) and pair variance under its bound",
                  worst_rel);
    report(2, pass, buf);
}

// ---------------------------------------------------------------------- 3

void criterion_3() {
    auto rep = verify_lemma2(7);
    double clean = 0.0, noisy = 0.0;
    for (const auto& c : rep.checks) {
        if (c.name == "noise_free_secant_residual") clean = c.measured;
        if (c.name == "noisy_negative_control") noisy = c.measured;
    }
    std::snprintf(buf, sizeof(buf),
                  "noise-free secant residual %.3g <= 1e-10 over >=3 window pairs; noisy control "
                  "breaks it (%.3g)",
                  clean, noisy);
    report(3, rep.all_pass(), buf);
}

// ---------------------------------------------------------------------- 4

void criterion_4() {
    auto rep = verify_damping(3);
    double worst = 0.0;
    for (const auto& c : rep.checks) worst = std::max(worst, c.measured);
    std::snprintf(buf, sizeof(buf),
                  "damped curvature ratio inside [sigma_lo, sigma_hi] for 1000 random pairs, "
                  "clamps exact (worst deviation %.3g <= 1e-12)",
                  worst);
    report(4, rep.all_pass(), buf);
}

// ---------------------------------------------------------------------- 5

void criterion_5() {
    RngStream rng(2718);
    DampingConfig cfg{0.01, 1.5, 0.99};
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 2 + rng.next_u64() % 19;
        const std::size_t m = 1 + rng.next_u64() % 5;
        HistoryBuffer bufi(m);
        const std::size_t k = 1 + rng.next_u64() % m;
        for (std::size_t i = 0; i < k; ++i) {
            FlatVector s = rng.gaussian_vector(d, 1.0);
            if (squared_norm(s) == 0.0) s[0] = 1.0;
            FlatVector w = rng.gaussian_vector(d, 1.0);
            w.add_scaled(s, -dot(w, s) / dot(s, s));
            FlatVector y = s;
            y.scale(-10.0 + 20.0 * rng.next_unit());
            y.add(w);
            auto damped = damp_pair(s, y, cfg);
            bufi.push(std::move(s), std::move(damped.y_hat));
        }
        Eigen::MatrixXd h = dense_inverse_hessian(bufi);
        for (int probe = 0; probe < 50; ++probe) {
            FlatVector g = rng.gaussian_vector(d, 1.0);
            FlatVector fast = two_loop_apply(bufi, g);
            Eigen::Map<const Eigen::VectorXd> gm(g.data(), static_cast<Eigen::Index>(d));
            Eigen::VectorXd slow = h * gm;
            double num = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double diff = fast[i] - slow[static_cast<Eigen::Index>(i)];
                num += diff * diff;
            }
            worst = std::max(worst, std::sqrt(num) / slow.norm());
        }
    }
    std::snprintf(buf, sizeof(buf),
                  "two-loop product matches the dense rank-two-update oracle over 50 random "
                  "buffers (max rel err %.3g <= 1e-10)",
                  worst);
    report(5, worst <= 1e-10, buf);
}

// ---------------------------------------------------------------------- 6

void criterion_6() {
    auto rep = verify_spectral(9);
    std::snprintf(buf, sizeof(buf),
                  "implicit-model Rayleigh quotients inside [1/sigma_hi, (M+1)/sigma_lo] + 1e-9 "
                  "over damped collinear buffers (100 probes each)");
    report(6, rep.all_pass(), buf);
}

// ---------------------------------------------------------------------- 7

void criterion_7() {
    auto rep = verify_rate(0);
    double ratio = 0.0;
    for (const auto& c : rep.checks) {
        if (c.name == "envelope_max_ratio") ratio = c.measured;
    }
    std::snprintf(buf, sizeof(buf),
                  "linear-rate envelope holds for 500 post-warmup steps (max loss/envelope "
                  "ratio %.6g <= 1 + 1e-9)",
                  ratio);
    report(7, rep.all_pass(), buf);
}

// ---------------------------------------------------------------------- 8

void criterion_8() {
    auto rep = verify_noise_floor(1);
    double tail = 0.0, floor = 0.0;
    for (const auto& c : rep.checks) {
        if (c.name == "tail_loss_above_floor") {
            tail = c.measured;
            floor = c.expected;
        }
    }
    std::snprintf(buf, sizeof(buf),
                  "selection-rule floor: seed-averaged tail loss %.4g >= %.3g — does not hold on "
                  "the stationary noisy quadratic (the selection premise starves; see "
                  "verification notes)",
                  tail, floor);
    report(8, rep.all_pass(), buf);
}

// ---------------------------------------------------------------------- 9

void criterion_9() {
    RngStream data_rng(5);
    Dataset ds = synth_blobs(data_rng, 256, 3, 2, 2.0);
    MlpSpec spec{{3, 6, 2}, Activation::Tanh, 1e-4};
    auto obj = std::make_shared<MlpObjective>(ds, spec);
    RngStream init(11);
    FlatVector theta0 = init_mlp_params(spec, init);

    MlbfgsConfig cfg;
    cfg.update_period = 4;
    cfg.history = 3;
    cfg.beta = 0.9;
    cfg.step_momentum = 0.9;

    const long iters = cfg.update_period * (2 + static_cast<long>(cfg.history)) + 5;
    const std::size_t batch = 64;
    auto sizes = even_block_sizes(obj->dim(), 4);

    std::vector<std::vector<FlatVector>> trajs;
    std::vector<DistributedRun> finals;
    bool identical = true;
    bool memory_ok = true;
    bool bytes_ok = true;
    for (std::size_t p : {1u, 2u, 4u}) {
        BlockLayout layout = build_block_layout(sizes, p);
        DistributedRun run(obj, layout, cfg, theta0, RngStream(77), batch);
        std::vector<FlatVector> traj{theta0};
        for (long t = 1; t <= iters; ++t) {
            run.step(t, 0.05);
            traj.push_back(run.theta());
        }
        for (const auto& w : run.workers()) {
            if (w.counters().mem_history_elems != 2 * cfg.history * layout.owned_dims(w.id())) {
                memory_ok = false;
            }
            const auto expect_bytes = static_cast<std::uint64_t>(iters) * (p - 1) *
                                      layout.owned_dims(w.id()) * sizeof(double);
            if (w.counters().bytes_allgather != expect_bytes) bytes_ok = false;
        }
        trajs.push_back(std::move(traj));
    }
    for (std::size_t p = 1; p < trajs.size(); ++p) {
        for (std::size_t t = 0; t < trajs[0].size(); ++t) {
            if (!(trajs[p][t] == trajs[0][t])) identical = false;
        }
    }
    std::snprintf(buf, sizeof(buf),
                  "1/2/4-worker trajectories bit-identical (%s); per-node history memory equals "
                  "2M x owned dims (%s); gather byte counters match the closed form (%s)",
                  identical ? "yes" : "no", memory_ok ? "yes" : "no", bytes_ok ? "yes" : "no");
    report(9, identical && memory_ok && bytes_ok, buf);
}

// --------------------------------------------------------------------- 10

void criterion_10() {
    CostModelInputs in;
    in.d = 25.6e6;
    in.b = 64;
    in.p = 8;
    in.history = 10;
    in.period = 20;
    in.b_hessian = 1024;
    in.gamma = 1.0;
    in.c_fb = 1.0;
    in.m_fb = 1.0;
    in.layer_inputs = {4, 8};
    in.layer_params = {16, 64};

    bool pass = true;
    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::abs(b); };
    pass = pass && near(analytic_cost(CostKind::Sgd, in).opt_compute, 25.6e6);
    pass = pass && near(analytic_cost(CostKind::Mlbfgs, in).opt_compute,
                        25.6e6 + 2.0 * 10.0 * 25.6e6 / 8.0);
    pass = pass && near(history_elems_per_node(in), 6.4e7);
    pass = pass && near(analytic_cost(CostKind::Slbfgs, in).opt_compute,
                        25.6e6 + 2.0 * 10.0 * 25.6e6);
    // kfac inversion arithmetic on toy dims: (4^3 + 4^3 + 8^3 + 8^3) / 20.
    CostModelInputs toy = in;
    toy.d = 80;
    pass = pass && near(analytic_cost(CostKind::Kfac, toy).fwd_bwd_compute,
                        80.0 + 64.0 + 1152.0 / 20.0);
    const double total = history_elems_total(in);
    const double rel_to_published = std::abs(total - 520e6) / 520e6;
    pass = pass && rel_to_published <= 0.05;
    std::snprintf(buf, sizeof(buf),
                  "cost-table formulas match hand arithmetic; total history elements 2Md = "
                  "%.4g within 5%% of the published 520M (rel %.3g)",
                  total, rel_to_published);
    report(10, pass, buf);
}

// --------------------------------------------------------------------- 11

void criterion_11() {
    RngStream rng(17);
    Dataset ds = synth_blobs(rng, 48, 5, 3, 2.5);
    MlpSpec spec{{5, 8, 3}, Activation::Tanh, 1e-3};
    MlpObjective mlp(ds, spec);
    Dataset ds2 = synth_blobs(rng, 48, 4, 2, 2.0);
    std::vector<std::size_t> batch{0, 1, 2, 3, 4, 5, 6, 7};

    double worst_mlp = 0.0, worst_logit = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        RngStream init = rng.split(static_cast<std::uint64_t>(trial));
        FlatVector params = init_mlp_params(spec, init);
        auto lg = mlp.eval_batch(params, batch);
        auto fd = finite_diff_grad(
            [&](const FlatVector& p) { return mlp.eval_batch(p, batch).loss; }, params, 1e-5);
        worst_mlp = std::max(worst_mlp, norm(lg.grad - fd) / norm(fd));

        FlatVector theta = rng.gaussian_vector(5, 1.0);
        auto lg2 = logistic_loss_grad(ds2, batch, theta, 0.01);
        auto fd2 = finite_diff_grad(
            [&](const FlatVector& t) { return logistic_loss_grad(ds2, batch, t, 0.01).loss; },
            theta, 1e-5);
        worst_logit = std::max(worst_logit, norm(lg2.grad - fd2) / norm(fd2));
    }
    std::snprintf(buf, sizeof(buf),
                  "analytic gradients vs central differences at 20 random points: mlp rel %.3g, "
                  "logistic rel %.3g (<= 1e-5)",
                  worst_mlp, worst_logit);
    report(11, worst_mlp <= 1e-5 && worst_logit <= 1e-5, buf);
}

// --------------------------------------------------------------------- 12

// One training run for criterion 12; evaluates the full-data loss once at
// the end so the comparison sweep stays inside its runtime budget.
double mlp_final_loss(const std::string& kind, double lr, std::uint64_t seed) {
    const std::size_t batch = 512;
    const long iters = 300;
    RngStream root(seed);
    RngStream data_rng = root.split(kDataStream);
    Dataset ds = synth_blobs(data_rng, 2000, 10, 3, 5.0);
    MlpSpec spec{{10, 16, 3}, Activation::Tanh, 1e-4};
    auto obj = std::make_shared<MlpObjective>(ds, spec);
    RngStream init = root.split(kInitStream);
    FlatVector theta = init_mlp_params(spec, init);
    RngStream iter_root = root.split(kIterStream);

    if (kind == "sgd") {
        SgdOptimizer opt(obj->dim(), 0.9);
        for (long t = 1; t <= iters; ++t) {
            auto lg = eval_iteration(*obj, theta, iter_root, t, batch);
            theta = opt.step(theta, lg.grad, lr);
            if (!theta.all_finite()) return 1e12;
        }
    } else {
        MlbfgsConfig cfg;
        cfg.update_period = 10;
        cfg.history = 10;
        cfg.beta = 0.9;
        cfg.step_momentum = 0.9;
        cfg.damping = {0.5, 1.5, 0.99};
        auto g0 = eval_iteration(*obj, theta, iter_root, 0, batch);
        MlbfgsBlockOptimizer opt(cfg, theta, g0.grad);
        for (long t = 1; t <= iters; ++t) {
            auto lg = eval_iteration(*obj, theta, iter_root, t, batch);
            theta = opt.step(theta, lg.grad, t, lr).theta_next;
            if (!theta.all_finite()) return 1e12;
        }
    }
    return obj->ref_loss(theta);
}

void criterion_12() {
    const std::vector<double> lrs{0.5, 0.3, 0.1};
    const int seeds = 5;
    auto tuned_mean_final = [&](const std::string& kind) {
        double best = 1e300;
        for (double lr : lrs) {
            double acc = 0.0;
            for (int s = 0; s < seeds; ++s) {
                acc += std::min(mlp_final_loss(kind, lr, static_cast<std::uint64_t>(100 + s)),
                                1e12);
            }
            best = std::min(best, acc / seeds);
        }
        return best;
    };

    const double sgd_best = tuned_mean_final("sgd");
    const double ml_best = tuned_mean_final("mlbfgs");
    std::snprintf(buf, sizeof(buf),
                  "2-layer network on synthetic clusters (n=2000, 5 seeds, 3 rates each): "
                  "tuned mlbfgs train loss %.4g <= tuned sgd %.4g",
                  ml_best, sgd_best);
    report(12, ml_best <= sgd_best, buf);
}

// --------------------------------------------------------------------- 13

void criterion_13() {
    RunConfig cfg;
    cfg.seed = 100;
    cfg.iterations = 200;
    cfg.batch_size = 1;
    cfg.objective.kind = "quadratic";
    cfg.objective.dim = 4;
    cfg.objective.hessian = "spd";
    cfg.objective.lambda_min = 0.5;
    cfg.objective.lambda_max = 2.0;
    cfg.objective.noise_sigma = 0.4;
    cfg.objective.theta0 = {-2.5, 2.0, 1.5, -1.5};
    cfg.optimizer.kind = "mlbfgs";
    cfg.optimizer.update_period = 10;
    cfg.optimizer.history = 10;
    cfg.optimizer.beta = 0.9;
    cfg.optimizer.step_momentum = 0.0;
    cfg.optimizer.sigma_lo = 0.5;
    cfg.optimizer.sigma_hi = 1.5;
    cfg.schedule.kind = "constant";
    cfg.schedule.base = 0.01;

    auto sum = ablation_run(cfg, out_dir("ablate"), 10, 200);
    const auto& both = sum.variants.at("both");
    const auto& neither = sum.variants.at("neither");
    const bool degraded =
        neither.mean_loss_at_checkpoint >= 10.0 * both.mean_loss_at_checkpoint;
    bool smoothest = true;
    for (const auto& [name, st] : sum.variants) {
        if (name != "both" && st.mean_tail_fluctuation <= both.mean_tail_fluctuation) {
            smoothest = false;
        }
    }
    std::snprintf(buf, sizeof(buf),
                  "ablation: stripped variant at iter 200 %.4g >= 10x full variant %.4g (%s); "
                  "full variant has the smallest tail fluctuation (%s)",
                  neither.mean_loss_at_checkpoint, both.mean_loss_at_checkpoint,
                  degraded ? "yes" : "no", smoothest ? "yes" : "no");
    report(13, degraded && smoothest, buf);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_13();
    std::printf("%d of 13 criteria passed\n", 13 - failures);
    return failures == 0 ? 0 : 1;
}
