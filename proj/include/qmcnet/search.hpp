#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmcnet/digital_net.hpp"
#include "qmcnet/quality.hpp"
#include "qmcnet/reduce.hpp"
#include "qmcnet/rng.hpp"

namespace qmcnet {

enum class Objective { minimize, maximize };

struct SearchConfig {
    std::uint64_t candidates = 1000; // number of random scramble sets (M)
    std::uint64_t seed = 0;
    int q = 2;
    bool include_identity = true; // score the unscrambled net as candidate 0
    Objective objective = Objective::minimize;
    int threads = 1;
};

struct SearchResult {
    ScrambleSet best_scramble;
    DigitalNet best_net;
    double best_wafom = 0.0;
    std::uint64_t candidate_index = 0; // 0 = identity
    // (candidate index, wafom) each time the incumbent improved, first
    // candidate included; strictly monotone in the objective direction
    std::vector<std::pair<std::uint64_t, double>> trace;
};

namespace detail {

inline ScrambleSet candidate_scramble(int s, int n, std::uint64_t seed,
                                      std::uint64_t index) {
    if (index == 0)
        return identity_scramble_set(s, n);
    auto rng = SplitMix64::substream(seed, index);
    return random_scramble_set(s, n, rng);
}

} // namespace detail

// Random linear-scrambling search: candidate i >= 1 draws one lower
// triangular matrix per dimension from substream (seed, i); candidate 0 is
// the identity when cfg.include_identity. Every candidate's WAFOM is scored
// with the table-driven path and the extremal one wins, ties going to the
// smallest index. Lower triangular scrambling multiplies each C_i by a
// non-singular matrix on the left, so the t-value is unchanged; debug builds
// spot-check that on a thin sample. Deterministic for fixed (net, cfg),
// independent of cfg.threads.
inline SearchResult scramble_search(const DigitalNet& net, const SearchConfig& cfg) {
    if (cfg.candidates < 1)
        throw std::invalid_argument("scramble_search: candidates >= 1 required");
    if (net.m > net.n)
        throw std::invalid_argument("scramble_search: m <= n required");
    if (net.n > 64)
        throw std::invalid_argument("scramble_search: n <= 64 required");

    const std::uint64_t first = cfg.include_identity ? 0 : 1;
    const std::uint64_t last = cfg.candidates; // inclusive
#ifndef NDEBUG
    const int t_unscrambled = t_value(net);
#endif

    std::vector<double> value(last + 1, 0.0);
    parallel_chunks(static_cast<std::size_t>(last - first + 1), cfg.threads,
                    [&](std::size_t k) {
                        const std::uint64_t idx = first + k;
                        const ScrambleSet L =
                            detail::candidate_scramble(net.s, net.n, cfg.seed, idx);
                        const DigitalNet cand = scramble(net, L);
                        value[idx] = wafom_fast(cand, cfg.q);
#ifndef NDEBUG
                        // 1% spot check of t-value invariance under scrambling
                        if (idx % 100 == 1)
                            assert(t_value(cand) == t_unscrambled);
#endif
                    });

    SearchResult res;
    res.candidate_index = first;
    res.best_wafom = value[first];
    res.trace.emplace_back(first, value[first]);
    for (std::uint64_t idx = first + 1; idx <= last; ++idx) {
        const bool better = cfg.objective == Objective::minimize
                                ? value[idx] < res.best_wafom
                                : value[idx] > res.best_wafom;
        if (better) {
            res.candidate_index = idx;
            res.best_wafom = value[idx];
            res.trace.emplace_back(idx, value[idx]);
        }
    }

    res.best_scramble =
        detail::candidate_scramble(net.s, net.n, cfg.seed, res.candidate_index);
    res.best_net = scramble(net, res.best_scramble);

    // cross-check the winning score against the reference path
    const double ref = wafom(res.best_net, cfg.q);
    const double tol = 1e-12 * std::max(std::abs(ref), std::abs(res.best_wafom));
    if (std::abs(ref - res.best_wafom) > tol)
        throw std::runtime_error(
            "scramble_search: WAFOM paths disagree on the winner (fast=" +
            std::to_string(res.best_wafom) + ", reference=" + std::to_string(ref) + ")");
    return res;
}

namespace detail {

inline DigitalNet net_from_column_words(int s, int n,
                                        const std::vector<std::vector<std::uint64_t>>& colw) {
    const int m = static_cast<int>(colw[0].size());
    std::vector<GF2Matrix> gen;
    gen.reserve(s);
    for (int i = 0; i < s; ++i) {
        GF2Matrix C(n, m);
        for (int l = 0; l < m; ++l)
            for (int r = 0; r < n; ++r)
                if ((colw[i][l] >> r) & 1u)
                    C.set(r, l, true);
        gen.push_back(std::move(C));
    }
    return DigitalNet(s, m, n, std::move(gen));
}

} // namespace detail

// Greedy column-by-column baseline: grows all s matrices one column at a
// time, trying `candidates_per_column` random nonzero column tuples per step
// (candidate c of step m drawn from substream (seed, (m-1)*candidates + c + 1))
// and keeping the tuple whose net has the smallest WAFOM; ties go to the
// earliest candidate. Returns the net after each step, so out[k] has m = k+1.
inline std::vector<DigitalNet> naive_column_search(int s, int n, int m_max,
                                                   int candidates_per_column,
                                                   std::uint64_t seed, int q = 2) {
    if (s < 1 || n < 1 || n > 64)
        throw std::invalid_argument("naive_column_search: s >= 1, 1 <= n <= 64 required");
    if (m_max < 1 || m_max > n)
        throw std::invalid_argument("naive_column_search: 1 <= m_max <= n required");
    if (candidates_per_column < 1)
        throw std::invalid_argument("naive_column_search: candidates >= 1 required");

    const std::uint64_t nmask =
        n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    std::vector<std::vector<std::uint64_t>> colw(s);
    std::vector<DigitalNet> out;
    out.reserve(m_max);
    for (int m = 1; m <= m_max; ++m) {
        double best_w = std::numeric_limits<double>::infinity();
        std::vector<std::uint64_t> best_cols(s, 0);
        for (int c = 0; c < candidates_per_column; ++c) {
            auto rng = SplitMix64::substream(
                seed, static_cast<std::uint64_t>(m - 1) * candidates_per_column + c + 1);
            std::vector<std::uint64_t> cand(s);
            do {
                bool all_zero = true;
                for (int i = 0; i < s; ++i) {
                    cand[i] = rng.next() & nmask;
                    if (cand[i])
                        all_zero = false;
                }
                if (!all_zero)
                    break;
            } while (true);
            for (int i = 0; i < s; ++i)
                colw[i].push_back(cand[i]);
            const double w = wafom_fast(detail::net_from_column_words(s, n, colw), q);
            for (int i = 0; i < s; ++i)
                colw[i].pop_back();
            if (w < best_w) {
                best_w = w;
                best_cols = cand;
            }
        }
        for (int i = 0; i < s; ++i)
            colw[i].push_back(best_cols[i]);
        out.push_back(detail::net_from_column_words(s, n, colw));
    }
    return out;
}

} // namespace qmcnet
