#include "mlbfgs/reduction.hpp"

#include <stdexcept>

namespace mlbfgs {

namespace {

void assign(std::size_t wlo, std::size_t whi, std::size_t lo, std::size_t hi,
            std::vector<std::pair<std::size_t, std::size_t>>& out) {
    if (whi - wlo == 1) {
        out[wlo] = {lo, hi};
        return;
    }
    const std::size_t wmid = wlo + (whi - wlo) / 2;
    const std::size_t mid = lo + (hi - lo) / 2;
    assign(wlo, wmid, lo, mid, out);
    assign(wmid, whi, mid, hi, out);
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> shard_ranges(std::size_t n,
                                                              std::size_t workers) {
    if (workers == 0) throw std::invalid_argument("shard_ranges: zero workers");
    if (n < workers) throw std::invalid_argument("shard_ranges: fewer items than workers");
    std::vector<std::pair<std::size_t, std::size_t>> out(workers);
    assign(0, workers, 0, n, out);
    return out;
}

}  // namespace mlbfgs
