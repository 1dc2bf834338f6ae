#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace mlbfgs {

/// Pairwise (binary-tree) reduction over [lo, hi). Splitting at
/// mid = lo + (hi - lo) / 2 at every level makes the result independent of
/// how the range is later carved into sub-ranges along the same recursion:
/// combine(reduce(lo, mid), reduce(mid, hi)) IS reduce(lo, hi), bit for bit.
/// This is what lets worker-sharded sums reproduce the single-process sum
/// exactly.
template <typename T, typename Leaf, typename Combine>
T pairwise_reduce(std::size_t lo, std::size_t hi, Leaf&& leaf, Combine&& combine) {
    if (hi - lo == 1) return leaf(lo);
    const std::size_t mid = lo + (hi - lo) / 2;
    T left = pairwise_reduce<T>(lo, mid, leaf, combine);
    T right = pairwise_reduce<T>(mid, hi, leaf, combine);
    return combine(std::move(left), std::move(right));
}

/// Contiguous shard [start, end) per worker, produced by the same recursive
/// halving as pairwise_reduce (workers split in half alongside the range), so
/// shard sums are exactly the subtrees of the global reduction.
std::vector<std::pair<std::size_t, std::size_t>> shard_ranges(std::size_t n, std::size_t workers);

}  // namespace mlbfgs
