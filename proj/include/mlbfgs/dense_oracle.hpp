#pragma once

#include <Eigen/Dense>

#include "mlbfgs/history_buffer.hpp"

namespace mlbfgs {

/// Verification oracle: materializes the inverse-Hessian model the two-loop
/// recursion applies implicitly, by running the rank-two update
///   H_k = (I - rho y s')' H_{k-1} (I - rho y s') + rho s s'
/// over the stored pairs oldest -> newest from the same scaled-identity seed.
/// Intended for small dimensions in tests; never used on the optimizer path.
Eigen::MatrixXd dense_inverse_hessian(const HistoryBuffer& buf);

}  // namespace mlbfgs
