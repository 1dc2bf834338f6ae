#pragma once

#include <string>
#include <vector>

namespace mlbfgs {

enum class CostKind { Sgd, Kfac, Slbfgs, Mlbfgs };

CostKind cost_kind_from_string(const std::string& name);
std::string to_string(CostKind kind);

/// Inputs of the per-node compute/memory formulas. Counts are modeled as
/// doubles (operation counts, scalar elements); layer vectors are only needed
/// for the Kronecker-factored rows.
struct CostModelInputs {
    double d = 0.0;         // total parameters
    double b = 0.0;         // per-node batch size
    double b_hessian = 0.0; // separate Hessian batch
    double p = 1.0;         // workers
    double period = 1.0;    // curvature update period
    double history = 0.0;   // stored pair count
    double gamma = 1.0;     // extra-backward factor
    double c_fb = 0.0;      // per-sample forward/backward compute
    double m_fb = 0.0;      // per-sample forward/backward memory
    std::vector<double> layer_inputs;  // input neurons per layer
    std::vector<double> layer_params;  // parameters per layer
};

/// One optimizer row: per-node operation and element counts.
struct CostRow {
    double fwd_bwd_compute = 0.0;
    double opt_compute = 0.0;
    double fwd_bwd_memory = 0.0;
    double opt_memory = 0.0;
};

/// Evaluate the per-node cost formulas for one optimizer. Missing inputs for
/// the chosen kind raise ConfigError naming the field.
CostRow analytic_cost(CostKind kind, const CostModelInputs& in);

/// Curvature-history footprint in scalar elements.
double history_elems_total(const CostModelInputs& in);     // 2 M d
double history_elems_per_node(const CostModelInputs& in);  // 2 M d / p

}  // namespace mlbfgs
