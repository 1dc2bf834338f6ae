#include "mlbfgs/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mlbfgs/errors.hpp"
#include "mlbfgs/mlp.hpp"

namespace mlbfgs {

using json = nlohmann::ordered_json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.contains(it.key())) {
            throw ConfigError(where.empty() ? it.key() : where + "." + it.key(),
                              "unknown field");
        }
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(key, "wrong type");
    }
}

DataSpec parse_data(const json& j) {
    check_keys(j, "objective.data", {"kind", "n", "m", "classes", "separation", "path"});
    DataSpec d;
    d.kind = get_or<std::string>(j, "kind", d.kind);
    d.n = get_or<std::size_t>(j, "n", d.n);
    d.m = get_or<std::size_t>(j, "m", d.m);
    d.classes = get_or<std::size_t>(j, "classes", d.classes);
    d.separation = get_or<double>(j, "separation", d.separation);
    d.path = get_or<std::string>(j, "path", d.path);
    if (d.kind != "blobs" && d.kind != "csv") {
        throw ConfigError("objective.data.kind", "expected blobs or csv");
    }
    return d;
}

ObjectiveSpec parse_objective(const json& j) {
    check_keys(j, "objective",
               {"kind", "dim", "hessian", "diag", "lambda_min", "lambda_max", "noise_sigma",
                "theta0", "data", "weight_decay", "hidden", "activation"});
    ObjectiveSpec o;
    o.kind = get_or<std::string>(j, "kind", o.kind);
    o.dim = get_or<std::size_t>(j, "dim", o.dim);
    o.hessian = get_or<std::string>(j, "hessian", o.hessian);
    o.diag = get_or<std::vector<double>>(j, "diag", o.diag);
    o.lambda_min = get_or<double>(j, "lambda_min", o.lambda_min);
    o.lambda_max = get_or<double>(j, "lambda_max", o.lambda_max);
    o.noise_sigma = get_or<double>(j, "noise_sigma", o.noise_sigma);
    o.theta0 = get_or<std::vector<double>>(j, "theta0", o.theta0);
    if (j.contains("data")) o.data = parse_data(j.at("data"));
    o.weight_decay = get_or<double>(j, "weight_decay", o.weight_decay);
    o.hidden = get_or<std::vector<std::size_t>>(j, "hidden", o.hidden);
    o.activation = get_or<std::string>(j, "activation", o.activation);
    if (o.kind != "quadratic" && o.kind != "logistic" && o.kind != "mlp") {
        throw ConfigError("objective.kind", "expected quadratic, logistic or mlp");
    }
    if (o.kind == "quadratic" && o.hessian != "identity" && o.hessian != "diagonal" &&
        o.hessian != "spd") {
        throw ConfigError("objective.hessian", "expected identity, diagonal or spd");
    }
    if (o.activation != "tanh" && o.activation != "relu") {
        throw ConfigError("objective.activation", "expected tanh or relu");
    }
    return o;
}

OptimizerSpec parse_optimizer(const json& j) {
    check_keys(j, "optimizer",
               {"kind", "momentum", "beta1", "beta2", "eps", "update_period", "history", "beta",
                "step_momentum", "sigma_lo", "sigma_hi", "tau0", "use_damping", "filter_enabled",
                "filter_alpha", "filter_eps"});
    OptimizerSpec o;
    o.kind = get_or<std::string>(j, "kind", o.kind);
    o.momentum = get_or<double>(j, "momentum", o.momentum);
    o.beta1 = get_or<double>(j, "beta1", o.beta1);
    o.beta2 = get_or<double>(j, "beta2", o.beta2);
    o.eps = get_or<double>(j, "eps", o.eps);
    o.update_period = get_or<long>(j, "update_period", o.update_period);
    o.history = get_or<std::size_t>(j, "history", o.history);
    o.beta = get_or<double>(j, "beta", o.beta);
    o.step_momentum = get_or<double>(j, "step_momentum", o.step_momentum);
    o.sigma_lo = get_or<double>(j, "sigma_lo", o.sigma_lo);
    o.sigma_hi = get_or<double>(j, "sigma_hi", o.sigma_hi);
    o.tau0 = get_or<double>(j, "tau0", o.tau0);
    o.use_damping = get_or<bool>(j, "use_damping", o.use_damping);
    o.filter_enabled = get_or<bool>(j, "filter_enabled", o.filter_enabled);
    o.filter_alpha = get_or<double>(j, "filter_alpha", o.filter_alpha);
    o.filter_eps = get_or<double>(j, "filter_eps", o.filter_eps);
    const std::set<std::string> kinds{"sgd", "adam", "lbfgs", "newton", "mlbfgs"};
    if (!kinds.contains(o.kind)) {
        throw ConfigError("optimizer.kind", "expected sgd, adam, lbfgs, newton or mlbfgs");
    }
    return o;
}

ScheduleSpec parse_schedule(const json& j) {
    check_keys(j, "schedule", {"kind", "base", "min", "horizon", "factor", "interval"});
    ScheduleSpec s;
    s.kind = get_or<std::string>(j, "kind", s.kind);
    s.base = get_or<double>(j, "base", s.base);
    s.min = get_or<double>(j, "min", s.min);
    s.horizon = get_or<long>(j, "horizon", s.horizon);
    s.factor = get_or<double>(j, "factor", s.factor);
    s.interval = get_or<long>(j, "interval", s.interval);
    if (s.kind != "constant" && s.kind != "step" && s.kind != "cosine") {
        throw ConfigError("schedule.kind", "expected constant, step or cosine");
    }
    return s;
}

BlocksSpec parse_blocks(const json& j) {
    check_keys(j, "blocks", {"count", "assignment"});
    BlocksSpec b;
    b.count = get_or<std::size_t>(j, "count", b.count);
    b.assignment = get_or<std::string>(j, "assignment", b.assignment);
    if (b.assignment != "round_robin" && b.assignment != "balanced") {
        throw ConfigError("blocks.assignment", "expected round_robin or balanced");
    }
    return b;
}

}  // namespace

MlbfgsConfig OptimizerSpec::to_mlbfgs() const {
    MlbfgsConfig cfg;
    cfg.update_period = update_period;
    cfg.history = history;
    cfg.beta = beta;
    cfg.damping = {sigma_lo, sigma_hi, tau0};
    cfg.use_damping = use_damping;
    cfg.step_momentum = step_momentum;
    cfg.filter = to_filter();
    cfg.validate();
    return cfg;
}

PairFilterConfig OptimizerSpec::to_filter() const {
    return {filter_enabled, filter_alpha, filter_eps};
}

Schedule ScheduleSpec::to_schedule() const {
    Schedule s;
    s.kind = kind == "constant" ? Schedule::Kind::Constant
             : kind == "step"  ? Schedule::Kind::Step
                               : Schedule::Kind::Cosine;
    s.base = base;
    s.min = min;
    s.horizon = horizon;
    s.factor = factor;
    s.interval = interval;
    s.validate();
    return s;
}

void RunConfig::validate() const {
    if (schema_version != 1) throw ConfigError("schema_version", "expected 1");
    if (iterations < 0) throw ConfigError("iterations", "must be non-negative");
    if (batch_size == 0) throw ConfigError("batch_size", "must be positive");
    if (workers == 0) throw ConfigError("workers", "must be positive");
    if (blocks.count == 0) throw ConfigError("blocks.count", "must be positive");
    if (optimizer.kind == "mlbfgs") optimizer.to_mlbfgs();
    if (optimizer.kind != "mlbfgs" && workers > 1) {
        throw ConfigError("workers", "only the mlbfgs optimizer runs distributed");
    }
    schedule.to_schedule();
    if (objective.kind == "quadratic") {
        if (objective.hessian == "diagonal" && objective.diag.empty()) {
            throw ConfigError("objective.diag", "diagonal Hessian needs entries");
        }
        if (objective.hessian == "spd" &&
            !(objective.lambda_min > 0.0 && objective.lambda_max >= objective.lambda_min)) {
            throw ConfigError("objective.lambda_min", "need 0 < lambda_min <= lambda_max");
        }
        if (objective.noise_sigma < 0.0) {
            throw ConfigError("objective.noise_sigma", "must be non-negative");
        }
    }
    if (optimizer.kind == "newton" && objective.kind != "quadratic") {
        throw ConfigError("optimizer.kind", "newton requires the quadratic objective");
    }
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError("<document>", std::string("not valid JSON: ") + e.what());
    }
    check_keys(j, "",
               {"schema_version", "seed", "iterations", "batch_size", "workers", "blocks",
                "objective", "optimizer", "schedule", "record_wall_time"});
    if (!j.contains("seed")) throw ConfigError("seed", "required (runs never self-seed)");
    RunConfig cfg;
    cfg.schema_version = get_or<int>(j, "schema_version", cfg.schema_version);
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    cfg.iterations = get_or<long>(j, "iterations", cfg.iterations);
    cfg.batch_size = get_or<std::size_t>(j, "batch_size", cfg.batch_size);
    cfg.workers = get_or<std::size_t>(j, "workers", cfg.workers);
    if (j.contains("blocks")) cfg.blocks = parse_blocks(j.at("blocks"));
    if (j.contains("objective")) cfg.objective = parse_objective(j.at("objective"));
    if (j.contains("optimizer")) cfg.optimizer = parse_optimizer(j.at("optimizer"));
    if (j.contains("schedule")) cfg.schedule = parse_schedule(j.at("schedule"));
    cfg.record_wall_time = get_or<bool>(j, "record_wall_time", cfg.record_wall_time);
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<path>", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string emit_run_config(const RunConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["seed"] = cfg.seed;
    j["iterations"] = cfg.iterations;
    j["batch_size"] = cfg.batch_size;
    j["workers"] = cfg.workers;
    j["blocks"] = {{"count", cfg.blocks.count}, {"assignment", cfg.blocks.assignment}};
    json o;
    o["kind"] = cfg.objective.kind;
    o["dim"] = cfg.objective.dim;
    o["hessian"] = cfg.objective.hessian;
    o["diag"] = cfg.objective.diag;
    o["lambda_min"] = cfg.objective.lambda_min;
    o["lambda_max"] = cfg.objective.lambda_max;
    o["noise_sigma"] = cfg.objective.noise_sigma;
    o["theta0"] = cfg.objective.theta0;
    o["data"] = {{"kind", cfg.objective.data.kind},      {"n", cfg.objective.data.n},
                 {"m", cfg.objective.data.m},            {"classes", cfg.objective.data.classes},
                 {"separation", cfg.objective.data.separation}, {"path", cfg.objective.data.path}};
    o["weight_decay"] = cfg.objective.weight_decay;
    o["hidden"] = cfg.objective.hidden;
    o["activation"] = cfg.objective.activation;
    j["objective"] = o;
    json p;
    p["kind"] = cfg.optimizer.kind;
    p["momentum"] = cfg.optimizer.momentum;
    p["beta1"] = cfg.optimizer.beta1;
    p["beta2"] = cfg.optimizer.beta2;
    p["eps"] = cfg.optimizer.eps;
    p["update_period"] = cfg.optimizer.update_period;
    p["history"] = cfg.optimizer.history;
    p["beta"] = cfg.optimizer.beta;
    p["step_momentum"] = cfg.optimizer.step_momentum;
    p["sigma_lo"] = cfg.optimizer.sigma_lo;
    p["sigma_hi"] = cfg.optimizer.sigma_hi;
    p["tau0"] = cfg.optimizer.tau0;
    p["use_damping"] = cfg.optimizer.use_damping;
    p["filter_enabled"] = cfg.optimizer.filter_enabled;
    p["filter_alpha"] = cfg.optimizer.filter_alpha;
    p["filter_eps"] = cfg.optimizer.filter_eps;
    j["optimizer"] = p;
    j["schedule"] = {{"kind", cfg.schedule.kind},     {"base", cfg.schedule.base},
                     {"min", cfg.schedule.min},       {"horizon", cfg.schedule.horizon},
                     {"factor", cfg.schedule.factor}, {"interval", cfg.schedule.interval}};
    j["record_wall_time"] = cfg.record_wall_time;
    return j.dump(2) + "\n";
}

std::shared_ptr<Objective> build_objective(const RunConfig& cfg) {
    const auto& o = cfg.objective;
    RngStream root(cfg.seed);
    if (o.kind == "quadratic") {
        if (o.hessian == "identity") {
            return std::make_shared<QuadraticObjective>(
                QuadraticObjective::identity(o.dim, o.noise_sigma));
        }
        if (o.hessian == "diagonal") {
            return std::make_shared<QuadraticObjective>(
                QuadraticObjective::diagonal(o.diag, o.noise_sigma));
        }
        RngStream hrng = root.split(kHessianStream);
        return std::make_shared<QuadraticObjective>(QuadraticObjective::random_spd(
            hrng, o.dim, o.lambda_min, o.lambda_max, o.noise_sigma));
    }

    Dataset ds;
    if (o.data.kind == "csv") {
        ds = load_dataset_csv(o.data.path);
    } else {
        RngStream drng = root.split(kDataStream);
        ds = synth_blobs(drng, o.data.n, o.data.m, o.data.classes, o.data.separation);
    }
    if (o.kind == "logistic") {
        return std::make_shared<LogisticObjective>(std::move(ds), o.weight_decay);
    }
    MlpSpec spec;
    spec.widths.push_back(ds.m);
    for (std::size_t h : o.hidden) spec.widths.push_back(h);
    spec.widths.push_back(ds.classes);
    spec.activation = o.activation == "tanh" ? Activation::Tanh : Activation::Relu;
    spec.weight_decay = o.weight_decay;
    return std::make_shared<MlpObjective>(std::move(ds), std::move(spec));
}

FlatVector initial_theta(const RunConfig& cfg, const Objective& obj) {
    if (!cfg.objective.theta0.empty()) {
        if (cfg.objective.theta0.size() != obj.dim()) {
            throw ConfigError("objective.theta0", "dimension does not match the objective");
        }
        return FlatVector(cfg.objective.theta0);
    }
    RngStream init = RngStream(cfg.seed).split(kInitStream);
    if (cfg.objective.kind == "mlp") {
        const auto& mlp = dynamic_cast<const MlpObjective&>(obj);
        return init_mlp_params(mlp.spec(), init);
    }
    if (cfg.objective.kind == "logistic") {
        return FlatVector(obj.dim());  // zero start is the convex default
    }
    return init.gaussian_vector(obj.dim(), 1.0);
}

BlockLayout build_layout(const RunConfig& cfg, std::size_t dim) {
    auto sizes = even_block_sizes(dim, cfg.blocks.count);
    if (cfg.blocks.assignment == "balanced") {
        return build_balanced_layout(sizes, cfg.workers);
    }
    return build_block_layout(sizes, cfg.workers);
}

CostModelInputs load_cost_inputs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<path>", "cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("<document>", std::string("not valid JSON: ") + e.what());
    }
    check_keys(j, "",
               {"d", "b", "b_hessian", "p", "period", "history", "gamma", "c_fb", "m_fb",
                "layer_inputs", "layer_params"});
    CostModelInputs c;
    c.d = get_or<double>(j, "d", c.d);
    c.b = get_or<double>(j, "b", c.b);
    c.b_hessian = get_or<double>(j, "b_hessian", c.b_hessian);
    c.p = get_or<double>(j, "p", c.p);
    c.period = get_or<double>(j, "period", c.period);
    c.history = get_or<double>(j, "history", c.history);
    c.gamma = get_or<double>(j, "gamma", c.gamma);
    c.c_fb = get_or<double>(j, "c_fb", c.c_fb);
    c.m_fb = get_or<double>(j, "m_fb", c.m_fb);
    c.layer_inputs = get_or<std::vector<double>>(j, "layer_inputs", c.layer_inputs);
    c.layer_params = get_or<std::vector<double>>(j, "layer_params", c.layer_params);
    return c;
}

}  // namespace mlbfgs
