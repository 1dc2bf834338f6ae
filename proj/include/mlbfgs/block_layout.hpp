#pragma once

#include <cstddef>
#include <vector>

#include "mlbfgs/flat_vector.hpp"

namespace mlbfgs {

/// A partition of the flat parameter vector into contiguous blocks, each
/// assigned to one worker. Ranges are disjoint, sorted and cover [0, dim)
/// exactly; every block is non-empty.
class BlockLayout {
 public:
    struct Range {
        std::size_t start = 0;
        std::size_t end = 0;  // exclusive
        std::size_t size() const { return end - start; }
    };

    BlockLayout(std::vector<Range> ranges, std::vector<std::size_t> worker_of_block,
                std::size_t workers);

    std::size_t dim() const { return dim_; }
    std::size_t num_blocks() const { return ranges_.size(); }
    std::size_t num_workers() const { return workers_; }

    const Range& range(std::size_t block) const;
    std::size_t worker_of(std::size_t block) const;

    /// Blocks owned by a worker, in block-index order.
    std::vector<std::size_t> blocks_of_worker(std::size_t worker) const;
    /// Total parameter count owned by a worker.
    std::size_t owned_dims(std::size_t worker) const;

 private:
    std::vector<Range> ranges_;
    std::vector<std::size_t> worker_of_block_;
    std::size_t workers_ = 1;
    std::size_t dim_ = 0;
};

/// Blocks of the given sizes covering [0, sum(sizes)), assigned to workers
/// round-robin by block index. Workers may hold several blocks.
BlockLayout build_block_layout(const std::vector<std::size_t>& block_sizes, std::size_t workers);

/// Same ranges, but blocks are assigned greedily largest-first to the
/// currently least-loaded worker (ties broken by lowest worker id), which
/// evens out per-node memory when block sizes differ.
BlockLayout build_balanced_layout(const std::vector<std::size_t>& block_sizes,
                                  std::size_t workers);

/// Evenly split a dimension into `blocks` contiguous pieces (remainder spread
/// over the leading blocks).
std::vector<std::size_t> even_block_sizes(std::size_t dim, std::size_t blocks);

/// Copy of the sub-vector for one block.
FlatVector block_view(const FlatVector& v, const BlockLayout& layout, std::size_t block);

/// Inverse of block_view: writes `values` back into block `block` of `v`.
void scatter_block(FlatVector& v, const BlockLayout& layout, std::size_t block,
                   const FlatVector& values);

}  // namespace mlbfgs
