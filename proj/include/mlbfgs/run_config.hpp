#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mlbfgs/block_layout.hpp"
#include "mlbfgs/cost_model.hpp"
#include "mlbfgs/objectives.hpp"
#include "mlbfgs/optimizers.hpp"
#include "mlbfgs/schedule.hpp"

namespace mlbfgs {

/// Reserved sub-stream ids off the run seed. Every consumer derives its
/// randomness from one of these, so adding draws in one place never shifts
/// another's sequence.
inline constexpr std::uint64_t kIterStream = 0;     // per-iteration noise/batches
inline constexpr std::uint64_t kDataStream = 1;     // synthetic dataset generation
inline constexpr std::uint64_t kInitStream = 2;     // parameter initialization
inline constexpr std::uint64_t kHessianStream = 3;  // random SPD Hessian draw

struct DataSpec {
    std::string kind = "blobs";  // blobs | csv
    std::size_t n = 1000;
    std::size_t m = 2;
    std::size_t classes = 2;
    double separation = 2.0;
    std::string path;  // csv source

    bool operator==(const DataSpec&) const = default;
};

struct ObjectiveSpec {
    std::string kind = "quadratic";  // quadratic | logistic | mlp

    // quadratic
    std::size_t dim = 2;
    std::string hessian = "identity";  // identity | diagonal | spd
    std::vector<double> diag;
    double lambda_min = 1.0;
    double lambda_max = 1.0;
    double noise_sigma = 0.0;
    std::vector<double> theta0;  // empty: objective-specific default start

    // dataset-backed
    DataSpec data;
    double weight_decay = 0.0;

    // mlp
    std::vector<std::size_t> hidden = {16};
    std::string activation = "tanh";

    bool operator==(const ObjectiveSpec&) const = default;
};

struct OptimizerSpec {
    std::string kind = "sgd";  // sgd | adam | lbfgs | newton | mlbfgs

    double momentum = 0.0;  // sgd heavy-ball

    double beta1 = 0.9;  // adam
    double beta2 = 0.999;
    double eps = 1e-8;

    long update_period = 50;  // mlbfgs
    std::size_t history = 10;
    double beta = 0.999;
    double step_momentum = 0.9;
    double sigma_lo = 0.01;
    double sigma_hi = 1.5;
    double tau0 = 0.99;
    bool use_damping = true;
    bool filter_enabled = false;
    double filter_alpha = 4.0;
    double filter_eps = 0.0;

    bool operator==(const OptimizerSpec&) const = default;

    MlbfgsConfig to_mlbfgs() const;
    PairFilterConfig to_filter() const;
};

struct ScheduleSpec {
    std::string kind = "constant";  // constant | step | cosine
    double base = 0.1;
    double min = 0.0001;
    long horizon = 100;
    double factor = 0.1;
    long interval = 1;

    bool operator==(const ScheduleSpec&) const = default;

    Schedule to_schedule() const;
};

struct BlocksSpec {
    std::size_t count = 1;
    std::string assignment = "round_robin";  // round_robin | balanced

    bool operator==(const BlocksSpec&) const = default;
};

/// One experiment: objective, optimizer, schedule, partitioning, budget and
/// seed. Serialized as a single JSON document with a schema_version field.
struct RunConfig {
    int schema_version = 1;
    std::uint64_t seed = 0;
    long iterations = 100;
    std::size_t batch_size = 32;
    std::size_t workers = 1;
    BlocksSpec blocks;
    ObjectiveSpec objective;
    OptimizerSpec optimizer;
    ScheduleSpec schedule;
    bool record_wall_time = false;

    bool operator==(const RunConfig&) const = default;

    void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string emit_run_config(const RunConfig& cfg);

/// The run's starting parameters (explicit theta0, or the objective's
/// deterministic default derived from the seed).
FlatVector initial_theta(const RunConfig& cfg, const Objective& obj);

/// Objective instance for this config; data/Hessian generation and default
/// initialization draw from streams derived from the run seed.
std::shared_ptr<Objective> build_objective(const RunConfig& cfg);

BlockLayout build_layout(const RunConfig& cfg, std::size_t dim);

/// Cost-model inputs from a JSON document (keys mirror the field names).
CostModelInputs load_cost_inputs(const std::string& path);

}  // namespace mlbfgs
