#include "mlbfgs/history_buffer.hpp"

#include <stdexcept>
#include <vector>

#include "mlbfgs/errors.hpp"

namespace mlbfgs {

HistoryBuffer::HistoryBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("HistoryBuffer: capacity must be positive");
}

double HistoryBuffer::push(FlatVector s, FlatVector y_hat) {
    check_same_dim(s, y_hat, "HistoryBuffer::push");
    if (!pairs_.empty()) check_same_dim(s, pairs_.front().s, "HistoryBuffer::push");
    const double sy = dot(s, y_hat);
    if (!(sy > 0.0)) {
        throw CurvatureError("HistoryBuffer::push: non-positive curvature s'y = " +
                             std::to_string(sy));
    }
    if (pairs_.size() == capacity_) pairs_.pop_front();
    const double rho = 1.0 / sy;
    pairs_.push_back({std::move(s), std::move(y_hat), rho});
    ++push_count_;
    return rho;
}

void HistoryBuffer::clear() { pairs_.clear(); }

FlatVector two_loop_apply(const HistoryBuffer& buf, const FlatVector& g) {
    if (buf.empty()) {
        throw EmptyHistoryError("two_loop_apply: no curvature pairs stored");
    }
    const std::size_t k = buf.size();
    FlatVector q = g;
    std::vector<double> alpha(k, 0.0);
    for (std::size_t i = k; i-- > 0;) {
        const CurvaturePair& p = buf.pair(i);
        alpha[i] = p.rho * dot(p.s, q);
        q.add_scaled(p.y_hat, -alpha[i]);
    }
    const CurvaturePair& newest = buf.newest();
    const double gamma = dot(newest.s, newest.y_hat) / dot(newest.y_hat, newest.y_hat);
    q.scale(gamma);
    for (std::size_t i = 0; i < k; ++i) {
        const CurvaturePair& p = buf.pair(i);
        const double beta = p.rho * dot(p.y_hat, q);
        q.add_scaled(p.s, alpha[i] - beta);
    }
    return q;
}

}  // namespace mlbfgs
