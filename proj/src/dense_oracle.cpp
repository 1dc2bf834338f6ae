#include "mlbfgs/dense_oracle.hpp"

#include "mlbfgs/errors.hpp"

namespace mlbfgs {

Eigen::MatrixXd dense_inverse_hessian(const HistoryBuffer& buf) {
    if (buf.empty()) {
        throw EmptyHistoryError("dense_inverse_hessian: no curvature pairs stored");
    }
    const auto d = static_cast<Eigen::Index>(buf.pair(0).s.dim());
    const CurvaturePair& newest = buf.newest();
    const double gamma = dot(newest.s, newest.y_hat) / dot(newest.y_hat, newest.y_hat);
    Eigen::MatrixXd h = gamma * Eigen::MatrixXd::Identity(d, d);
    for (std::size_t i = 0; i < buf.size(); ++i) {
        const CurvaturePair& p = buf.pair(i);
        Eigen::Map<const Eigen::VectorXd> s(p.s.data(), d);
        Eigen::Map<const Eigen::VectorXd> y(p.y_hat.data(), d);
        Eigen::MatrixXd v = Eigen::MatrixXd::Identity(d, d) - p.rho * y * s.transpose();
        h = v.transpose() * h * v + p.rho * s * s.transpose();
        // The recursion is symmetric in exact arithmetic; re-symmetrize so
        // rounding skew does not accumulate over deep histories.
        h = 0.5 * (h + h.transpose()).eval();
    }
    return h;
}

}  // namespace mlbfgs
