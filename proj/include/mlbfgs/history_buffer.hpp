#pragma once

#include <cstddef>
#include <deque>

#include "mlbfgs/flat_vector.hpp"

namespace mlbfgs {

/// One curvature observation: parameter change s, (possibly damped) gradient
/// change y_hat, and rho = 1 / (y_hat' s). Positive curvature is required.
struct CurvaturePair {
    FlatVector s;
    FlatVector y_hat;
    double rho = 0.0;
};

/// FIFO of the most recent curvature pairs, capacity M. Oldest pairs are
/// evicted when the buffer is full. The implicit inverse-Hessian model is
/// defined entirely by this sequence.
class HistoryBuffer {
 public:
    explicit HistoryBuffer(std::size_t capacity);

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }
    /// Total pushes accepted over the buffer's lifetime.
    std::size_t push_count() const { return push_count_; }

    /// Pairs oldest -> newest.
    const CurvaturePair& pair(std::size_t i) const { return pairs_[i]; }
    const CurvaturePair& newest() const { return pairs_.back(); }

    /// Append a pair; throws CurvatureError unless s'y_hat > 0. Evicts the
    /// oldest pair when at capacity. Returns the stored rho.
    double push(FlatVector s, FlatVector y_hat);

    void clear();

 private:
    std::deque<CurvaturePair> pairs_;
    std::size_t capacity_;
    std::size_t push_count_ = 0;
};

/// Implicit product H*g over the stored pairs, seeded with the scaled
/// identity gamma*I, gamma = (s'y)/(y'y) of the newest pair. Runs over
/// however many pairs are stored; throws EmptyHistoryError when none are.
FlatVector two_loop_apply(const HistoryBuffer& buf, const FlatVector& g);

}  // namespace mlbfgs
