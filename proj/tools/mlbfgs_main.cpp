// Command-line front end: experiment runner, method comparison, ablation,
// cost tables and the verification suites.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mlbfgs/errors.hpp"
#include "mlbfgs/experiment.hpp"
#include "mlbfgs/run_config.hpp"
#include "mlbfgs/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitVerifyFailed = 2;

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir) {
    mlbfgs::RunConfig cfg = mlbfgs::load_run_config(config_path);
    if (seed) cfg.seed = *seed;
    auto result = mlbfgs::run_experiment(cfg, out_dir);
    std::printf("wrote %s (%zu rows%s)\n", result.csv_path.c_str(), result.rows.size(),
                result.diverged ? ", diverged" : "");
    return kExitOk;
}

int cmd_fig1(double sigma, double beta, long iters, int seeds, const std::string& out_path) {
    auto sum = mlbfgs::fig1_trajectories(sigma, beta, iters, seeds, out_path);
    std::printf("wrote %s\n", out_path.c_str());
    std::printf("mean final loss: sgd=%.6g vanilla_lbfgs=%.6g momentum_lbfgs=%.6g newton=%.6g\n",
                sum.sgd, sum.vanilla, sum.momentum, sum.newton);
    return kExitOk;
}

int cmd_ablate(const std::string& config_path, const std::string& out_dir, int seeds,
               long checkpoint) {
    mlbfgs::RunConfig cfg = mlbfgs::load_run_config(config_path);
    auto sum = mlbfgs::ablation_run(cfg, out_dir, seeds, checkpoint);
    for (const auto& [name, st] : sum.variants) {
        std::printf("%-14s loss@checkpoint=%.6g tail_fluctuation=%.6g final=%.6g\n", name.c_str(),
                    st.mean_loss_at_checkpoint, st.mean_tail_fluctuation, st.mean_final_loss);
    }
    for (const auto& [blocks, loss] : sum.block_sweep_final_loss) {
        std::printf("blocks=%zu mean final loss %.6g\n", blocks, loss);
    }
    return kExitOk;
}

int cmd_cost(const std::string& kind, const std::string& inputs_path,
             const std::string& out_path) {
    auto inputs = mlbfgs::load_cost_inputs(inputs_path);
    auto rows = mlbfgs::cost_report(kind, inputs, out_path);
    std::printf("%-8s %16s %16s %16s %16s\n", "opt", "fwd_bwd_compute", "opt_compute",
                "fwd_bwd_memory", "opt_memory");
    for (const auto& [name, row] : rows) {
        std::printf("%-8s %16.6g %16.6g %16.6g %16.6g\n", name.c_str(), row.fwd_bwd_compute,
                    row.opt_compute, row.fwd_bwd_memory, row.opt_memory);
    }
    std::printf("wrote %s\n", out_path.c_str());
    return kExitOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out_path) {
    auto reports = mlbfgs::run_verify_suites(suite, seed);
    mlbfgs::print_verify_reports(reports);
    if (!out_path.empty()) {
        std::filesystem::path out(out_path);
        if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
        std::ofstream f(out, std::ios::binary);
        f << mlbfgs::verify_reports_to_csv(reports);
        std::printf("wrote %s\n", out_path.c_str());
    }
    for (const auto& rep : reports) {
        if (!rep.all_pass()) return kExitVerifyFailed;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"momentum-averaged block L-BFGS toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, out_dir;
    std::optional<std::uint64_t> seed_override;
    std::uint64_t verify_seed = 42;
    double sigma = 0.2, beta = 0.9;
    long iters = 100, checkpoint = 200;
    int seeds = 20, ablate_seeds = 10;
    std::string cost_kind = "all", suite = "all";

    auto* run = app.add_subcommand("run", "execute one configured experiment");
    run->add_option("--config", config_path, "run configuration JSON")->required();
    run->add_option("--seed", seed_override, "override the config seed");
    run->add_option("--out", out_dir, "output directory")->required();

    auto* fig1 = app.add_subcommand("fig1", "four-method noisy-quadratic comparison");
    fig1->add_option("--sigma", sigma, "per-coordinate gradient noise");
    fig1->add_option("--beta", beta, "averaging coefficient of the momentum variant");
    fig1->add_option("--iters", iters, "iterations per run");
    fig1->add_option("--seeds", seeds, "number of seeds");
    fig1->add_option("--out", out_path, "output CSV path")->required();

    auto* ablate = app.add_subcommand("ablate", "averaging/damping ablation");
    ablate->add_option("--config", config_path, "base mlbfgs configuration JSON")->required();
    ablate->add_option("--out", out_dir, "output directory")->required();
    ablate->add_option("--seeds", ablate_seeds, "seeds per variant");
    ablate->add_option("--checkpoint", checkpoint, "comparison iteration");

    auto* cost = app.add_subcommand("cost", "analytic per-node cost table");
    cost->add_option("--kind", cost_kind, "sgd | kfac | slbfgs | mlbfgs | all");
    cost->add_option("--inputs", config_path, "cost-model inputs JSON")->required();
    cost->add_option("--out", out_path, "output CSV path")->required();

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("--suite", suite,
                       "lemma1 | lemma2 | damping | spectral | rate | floor | variance | all")
        ->required();
    verify->add_option("--seed", verify_seed, "suite seed");
    verify->add_option("--out", out_path, "optional report CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, seed_override, out_dir);
        if (fig1->parsed()) return cmd_fig1(sigma, beta, iters, seeds, out_path);
        if (ablate->parsed()) return cmd_ablate(config_path, out_dir, ablate_seeds, checkpoint);
        if (cost->parsed()) return cmd_cost(cost_kind, config_path, out_path);
        if (verify->parsed()) return cmd_verify(suite, verify_seed, out_path);
    } catch (const mlbfgs::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const mlbfgs::ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}
