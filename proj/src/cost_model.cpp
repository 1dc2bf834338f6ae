#include "mlbfgs/cost_model.hpp"

#include <stdexcept>

#include "mlbfgs/errors.hpp"

namespace mlbfgs {

CostKind cost_kind_from_string(const std::string& name) {
    if (name == "sgd") return CostKind::Sgd;
    if (name == "kfac") return CostKind::Kfac;
    if (name == "slbfgs") return CostKind::Slbfgs;
    if (name == "mlbfgs") return CostKind::Mlbfgs;
    throw ConfigError("kind", "unknown optimizer '" + name + "'");
}

std::string to_string(CostKind kind) {
    switch (kind) {
        case CostKind::Sgd: return "sgd";
        case CostKind::Kfac: return "kfac";
        case CostKind::Slbfgs: return "slbfgs";
        case CostKind::Mlbfgs: return "mlbfgs";
    }
    return "?";
}

namespace {

void require_positive(double v, const char* field) {
    if (!(v > 0.0)) throw ConfigError(field, "must be positive");
}

// Sum of per-layer inversion work: l^3 + (d/l)^3.
double inversion_term(const CostModelInputs& in) {
    if (in.layer_inputs.empty() || in.layer_inputs.size() != in.layer_params.size()) {
        throw ConfigError("layer_inputs/layer_params",
                          "kfac needs matching per-layer dimensions");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < in.layer_inputs.size(); ++i) {
        const double l = in.layer_inputs[i];
        const double di = in.layer_params[i];
        require_positive(l, "layer_inputs");
        require_positive(di, "layer_params");
        acc += l * l * l + (di / l) * (di / l) * (di / l);
    }
    return acc;
}

double factor_product_term(const CostModelInputs& in) {
    double acc = 0.0;
    for (std::size_t i = 0; i < in.layer_inputs.size(); ++i) {
        acc += (in.layer_inputs[i] + in.layer_params[i] / in.layer_inputs[i]) *
               in.layer_params[i];
    }
    return 2.0 * acc;
}

double factor_storage_term(const CostModelInputs& in) {
    double acc = 0.0;
    for (std::size_t i = 0; i < in.layer_inputs.size(); ++i) {
        const double l = in.layer_inputs[i];
        const double r = in.layer_params[i] / l;
        acc += l * l + r * r;
    }
    return 2.0 * acc;
}

}  // namespace

CostRow analytic_cost(CostKind kind, const CostModelInputs& in) {
    require_positive(in.d, "d");
    require_positive(in.b, "b");
    require_positive(in.p, "p");
    CostRow row;
    switch (kind) {
        case CostKind::Sgd:
            row.fwd_bwd_compute = in.b * in.c_fb;
            row.opt_compute = in.d;
            row.fwd_bwd_memory = in.b * in.m_fb;
            row.opt_memory = in.d;
            break;
        case CostKind::Kfac: {
            require_positive(in.period, "period");
            row.fwd_bwd_compute =
                in.d + in.gamma * in.b * in.c_fb + inversion_term(in) / in.period;
            row.opt_compute = in.d + factor_product_term(in);
            row.fwd_bwd_memory = in.d + in.b * in.m_fb;
            row.opt_memory = in.d + factor_storage_term(in);
            break;
        }
        case CostKind::Slbfgs:
            require_positive(in.period, "period");
            require_positive(in.history, "history");
            require_positive(in.b_hessian, "b_hessian");
            row.fwd_bwd_compute =
                in.d + 2.0 * in.b * in.c_fb + in.b_hessian * in.c_fb / in.period;
            row.opt_compute = in.d + 2.0 * in.history * in.d;
            row.fwd_bwd_memory = in.d + in.b * in.m_fb + in.b_hessian * in.m_fb / in.period;
            row.opt_memory = in.d + 2.0 * in.history * in.d;
            break;
        case CostKind::Mlbfgs:
            require_positive(in.history, "history");
            row.fwd_bwd_compute = in.d / in.p + in.b * in.c_fb;
            row.opt_compute = in.d + 2.0 * in.history * in.d / in.p;
            row.fwd_bwd_memory = in.d / in.p + in.b * in.m_fb;
            row.opt_memory = in.d + 2.0 * in.history * in.d / in.p;
            break;
    }
    return row;
}

double history_elems_total(const CostModelInputs& in) { return 2.0 * in.history * in.d; }

double history_elems_per_node(const CostModelInputs& in) {
    require_positive(in.p, "p");
    return 2.0 * in.history * in.d / in.p;
}

}  // namespace mlbfgs
