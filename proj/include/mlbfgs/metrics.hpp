#pragma once

#include <string>
#include <vector>

namespace mlbfgs {

/// One logged iteration. `split` is "train" for ordinary rows and "diverged"
/// for the final row of an aborted run.
struct MetricsRow {
    long iter = 0;
    long epoch = 0;
    std::string split = "train";
    double loss = 0.0;
    double grad_norm = 0.0;
    double lr = 0.0;
    double elapsed_ms = 0.0;
};

inline constexpr const char* kMetricsHeader = "iter,epoch,split,loss,grad_norm,lr,elapsed_ms";

/// Shortest-round-trip decimal text for a double (same bits back on parse),
/// so equal runs serialize to byte-equal files.
std::string format_double(double v);

std::string metrics_to_csv(const std::vector<MetricsRow>& rows);
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

}  // namespace mlbfgs
