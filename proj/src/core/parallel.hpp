#pragma once

#include <cstddef>
#include <functional>

namespace smim::parallel {

// Process-wide worker count. 1 = run everything inline.
void set_threads(int n);
int threads();

// Runs f(chunk_index, lo, hi) over fixed-size chunks of [0, n).
// Chunk boundaries depend only on (n, chunk); callers get determinism by
// writing per-chunk results into slot[chunk_index] and combining in index
// order (see tree_combine below).
void for_chunks(std::size_t n, std::size_t chunk,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& f);

std::size_t num_chunks(std::size_t n, std::size_t chunk);

// Pairwise (tree) fold of slots [0, k) in a fixed order:
// combine(dst, src) must fold src into dst. Result lands in slot 0.
template <typename Slot, typename Combine>
void tree_combine(Slot* slots, std::size_t k, Combine combine) {
  for (std::size_t stride = 1; stride < k; stride *= 2) {
    for (std::size_t i = 0; i + stride < k; i += 2 * stride) {
      combine(slots[i], slots[i + stride]);
    }
  }
}

}  // namespace smim::parallel
