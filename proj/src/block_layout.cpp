#include "mlbfgs/block_layout.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mlbfgs/errors.hpp"

namespace mlbfgs {

BlockLayout::BlockLayout(std::vector<Range> ranges, std::vector<std::size_t> worker_of_block,
                         std::size_t workers)
    : ranges_(std::move(ranges)), worker_of_block_(std::move(worker_of_block)), workers_(workers) {
    if (ranges_.empty()) throw InvalidLayoutError("layout has no blocks");
    if (workers_ == 0) throw InvalidLayoutError("layout needs at least one worker");
    if (worker_of_block_.size() != ranges_.size()) {
        throw InvalidLayoutError("worker assignment size does not match block count");
    }
    std::size_t expect = 0;
    for (std::size_t i = 0; i < ranges_.size(); ++i) {
        const Range& r = ranges_[i];
        if (r.end <= r.start) {
            throw InvalidLayoutError("block " + std::to_string(i) + " is empty");
        }
        if (r.start != expect) {
            throw InvalidLayoutError("block " + std::to_string(i) + " does not continue the cover");
        }
        if (worker_of_block_[i] >= workers_) {
            throw InvalidLayoutError("block " + std::to_string(i) + " assigned to unknown worker");
        }
        expect = r.end;
    }
    dim_ = expect;
}

const BlockLayout::Range& BlockLayout::range(std::size_t block) const {
    if (block >= ranges_.size()) {
        throw InvalidLayoutError("block index " + std::to_string(block) + " out of range");
    }
    return ranges_[block];
}

std::size_t BlockLayout::worker_of(std::size_t block) const {
    if (block >= worker_of_block_.size()) {
        throw InvalidLayoutError("block index " + std::to_string(block) + " out of range");
    }
    return worker_of_block_[block];
}

std::vector<std::size_t> BlockLayout::blocks_of_worker(std::size_t worker) const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < worker_of_block_.size(); ++b) {
        if (worker_of_block_[b] == worker) out.push_back(b);
    }
    return out;
}

std::size_t BlockLayout::owned_dims(std::size_t worker) const {
    std::size_t total = 0;
    for (std::size_t b = 0; b < worker_of_block_.size(); ++b) {
        if (worker_of_block_[b] == worker) total += ranges_[b].size();
    }
    return total;
}

namespace {

std::vector<BlockLayout::Range> make_ranges(const std::vector<std::size_t>& block_sizes) {
    if (block_sizes.empty()) throw InvalidLayoutError("no block sizes given");
    std::vector<BlockLayout::Range> ranges;
    ranges.reserve(block_sizes.size());
    std::size_t at = 0;
    for (std::size_t i = 0; i < block_sizes.size(); ++i) {
        if (block_sizes[i] == 0) {
            throw InvalidLayoutError("block " + std::to_string(i) + " has zero size");
        }
        ranges.push_back({at, at + block_sizes[i]});
        at += block_sizes[i];
    }
    return ranges;
}

}  // namespace

BlockLayout build_block_layout(const std::vector<std::size_t>& block_sizes, std::size_t workers) {
    auto ranges = make_ranges(block_sizes);
    std::vector<std::size_t> assignment(ranges.size());
    for (std::size_t b = 0; b < ranges.size(); ++b) assignment[b] = b % workers;
    return BlockLayout(std::move(ranges), std::move(assignment), workers);
}

BlockLayout build_balanced_layout(const std::vector<std::size_t>& block_sizes,
                                  std::size_t workers) {
    auto ranges = make_ranges(block_sizes);
    std::vector<std::size_t> order(ranges.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return block_sizes[a] > block_sizes[b];
    });
    std::vector<std::size_t> load(workers, 0);
    std::vector<std::size_t> assignment(ranges.size());
    for (std::size_t b : order) {
        std::size_t w = static_cast<std::size_t>(
            std::min_element(load.begin(), load.end()) - load.begin());
        assignment[b] = w;
        load[w] += block_sizes[b];
    }
    return BlockLayout(std::move(ranges), std::move(assignment), workers);
}

std::vector<std::size_t> even_block_sizes(std::size_t dim, std::size_t blocks) {
    if (blocks == 0 || dim == 0 || blocks > dim) {
        throw InvalidLayoutError("cannot split dimension " + std::to_string(dim) + " into " +
                                 std::to_string(blocks) + " blocks");
    }
    std::vector<std::size_t> sizes(blocks, dim / blocks);
    for (std::size_t i = 0; i < dim % blocks; ++i) sizes[i] += 1;
    return sizes;
}

FlatVector block_view(const FlatVector& v, const BlockLayout& layout, std::size_t block) {
    if (v.dim() != layout.dim()) {
        throw DimensionMismatchError("block_view: vector dim " + std::to_string(v.dim()) +
                                     " vs layout dim " + std::to_string(layout.dim()));
    }
    const auto& r = layout.range(block);
    FlatVector out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = v[r.start + i];
    return out;
}

void scatter_block(FlatVector& v, const BlockLayout& layout, std::size_t block,
                   const FlatVector& values) {
    if (v.dim() != layout.dim()) {
        throw DimensionMismatchError("scatter_block: vector dim does not match layout");
    }
    const auto& r = layout.range(block);
    if (values.dim() != r.size()) {
        throw DimensionMismatchError("scatter_block: values dim " + std::to_string(values.dim()) +
                                     " vs block size " + std::to_string(r.size()));
    }
    for (std::size_t i = 0; i < r.size(); ++i) v[r.start + i] = values[i];
}

}  // namespace mlbfgs
