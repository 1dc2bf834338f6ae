#include "mlbfgs/metrics.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mlbfgs {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    out << kMetricsHeader << "\n";
    for (const auto& r : rows) {
        out << r.iter << ',' << r.epoch << ',' << r.split << ',' << format_double(r.loss) << ','
            << format_double(r.grad_norm) << ',' << format_double(r.lr) << ','
            << format_double(r.elapsed_ms) << "\n";
    }
    return out.str();
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << metrics_to_csv(rows);
}

}  // namespace mlbfgs
