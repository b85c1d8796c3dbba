#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace snrisk {

// Fixed-size block decomposition for Monte Carlo loops. Each block owns the
// RNG substream derived from (seed, block_index) and is processed by whichever
// worker grabs it; per-block results are merged in block order afterwards.
// Outputs are therefore bit-identical for any worker count.
struct BlockPlan {
    std::size_t n_items = 0;
    std::size_t block_size = 8192;
    std::size_t n_blocks() const {
        return n_items == 0 ? 0 : (n_items + block_size - 1) / block_size;
    }
    std::pair<std::size_t, std::size_t> block_range(std::size_t b) const {
        std::size_t lo = b * block_size;
        std::size_t hi = std::min(n_items, lo + block_size);
        return {lo, hi};
    }
};

// Runs fn(block_index, item_begin, item_end) for every block on `workers`
// threads (>=1). The first exception aborts remaining blocks and is rethrown.
void run_blocks(const BlockPlan& plan, int workers,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

} // namespace snrisk
