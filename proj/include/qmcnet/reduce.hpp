#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace qmcnet {

// Streaming pairwise summation. The reduction tree is the binary-counter
// shape: element i merges with stored partials once per trailing 1-bit of i.
// The tree therefore depends only on how many values were added, never on
// timing, which is what makes multi-threaded reductions reproducible: chunk
// sums are computed with one accumulator per chunk and combined in chunk
// order, giving the same tree as a single sequential pass.
template <typename T>
class PairwiseAccumulator {
public:
    void add(T v) {
        std::uint64_t c = count_++;
        int level = 0;
        while (c & 1u) {
            v += partial_[level];
            c >>= 1;
            ++level;
        }
        partial_[level] = v;
    }

    std::uint64_t count() const { return count_; }

    // Combines leftover partials from the lowest level up (fixed order).
    T total() const {
        T t{};
        std::uint64_t c = count_;
        for (int level = 0; c != 0; ++level, c >>= 1)
            if (c & 1u)
                t += partial_[level];
        return t;
    }

private:
    std::array<T, 64> partial_{};
    std::uint64_t count_ = 0;
};

// Simple Kahan (compensated) summation; used where terms arrive in a fixed
// order anyway and a pairwise tree would be overkill.
template <typename T>
class KahanAccumulator {
public:
    void add(T x) {
        const T y = x - comp_;
        const T t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }

    T total() const { return sum_; }

private:
    T sum_{};
    T comp_{};
};

// Runs fn(chunk_index) for every index in [0, n_chunks) on up to `threads`
// workers. Chunks must be independent (each writes only its own slot), so
// the scheduling order cannot affect results.
inline void parallel_chunks(std::size_t n_chunks, int threads,
                            const std::function<void(std::size_t)>& fn) {
    if (threads < 1)
        throw std::invalid_argument("parallel_chunks: threads >= 1 required");
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), n_chunks);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_chunks; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n_chunks)
                    return;
                fn(i);
            }
        });
    for (auto& t : pool)
        t.join();
}

} // namespace qmcnet
