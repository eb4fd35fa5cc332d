#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmcnet/digital_net.hpp"
#include "qmcnet/reduce.hpp"

namespace qmcnet {

namespace detail {

inline void check_wafom_base(int q) {
    if (q != 2 && q != 4)
        throw std::invalid_argument("WAFOM base q must be 2 or 4, got " +
                                    std::to_string(q));
}

inline int log2_base(int q) { return q == 2 ? 1 : 2; }

// Per-digit Walsh factors 1 +- q^-(b+2), b = 0-based digit index. Products
// and sums run in long double: the per-path results must agree to ~1e-12
// relative, which plain double cannot guarantee beyond m ~ 12.
inline void walsh_factors(int n, int q, std::vector<long double>& plus,
                          std::vector<long double>& minus) {
    plus.resize(n);
    minus.resize(n);
    for (int b = 0; b < n; ++b) {
        const long double w = std::ldexp(1.0L, -log2_base(q) * (b + 2));
        plus[b] = 1.0L + w;
        minus[b] = 1.0L - w;
    }
}

// Incremental GF(2) basis over <= 64-bit row words, keyed by lowest set bit,
// with an undo stack so a DFS can retract insertions.
struct RowBasis {
    std::array<std::uint64_t, 64> slot{};
    std::array<bool, 64> used{};
    std::vector<int> stack;

    // Reduces v against the basis; stores it if independent. Returns false
    // when v lies in the span (a dependence was found).
    bool insert(std::uint64_t v) {
        while (v) {
            const int b = std::countr_zero(v);
            if (!used[b]) {
                used[b] = true;
                slot[b] = v;
                stack.push_back(b);
                return true;
            }
            v ^= slot[b];
        }
        return false;
    }

    void rewind(std::size_t mark) {
        while (stack.size() > mark) {
            used[stack.back()] = false;
            stack.pop_back();
        }
    }
};

} // namespace detail

// Exact t-value: t = m - rho where rho is the largest k such that for every
// composition d_1 + ... + d_s = k the first d_i rows of each C_i are jointly
// linearly independent. The search walks compositions depth-first, keeps a
// shared incremental basis, and abandons a branch as soon as a dependence
// appears (any dependent prefix extends to a dependent composition).
inline int t_value(const DigitalNet& net) {
    if (net.m > net.n)
        throw std::invalid_argument("t_value: m <= n required (m=" +
                                    std::to_string(net.m) + ", n=" +
                                    std::to_string(net.n) + ")");
    const int s = net.s;
    const int m = net.m;
    if (m == 0)
        return 0;

    // rows[i][r] = row r of C_i packed into an m-bit word (m <= 62 always)
    std::vector<std::vector<std::uint64_t>> rows(s, std::vector<std::uint64_t>(m));
    for (int i = 0; i < s; ++i)
        for (int r = 0; r < m; ++r)
            rows[i][r] = net.gen[i].row_word(r);

    detail::RowBasis basis;

    // true iff some composition of `budget` over dimensions dim..s-1 is
    // dependent, given what is already in the basis
    auto find_dependent = [&](auto&& self, int dim, int budget) -> bool {
        if (budget == 0)
            return false;
        const std::size_t mark = basis.stack.size();
        if (dim == s - 1) {
            bool dep = false;
            for (int r = 0; r < budget; ++r)
                if (!basis.insert(rows[dim][r])) {
                    dep = true;
                    break;
                }
            basis.rewind(mark);
            return dep;
        }
        if (self(self, dim + 1, budget))
            return true; // d_dim = 0
        bool dep = false;
        for (int d = 1; d <= budget; ++d) {
            if (!basis.insert(rows[dim][d - 1])) {
                dep = true;
                break;
            }
            if (self(self, dim + 1, budget - d)) {
                dep = true;
                break;
            }
        }
        basis.rewind(mark);
        return dep;
    };

    for (int k = m; k >= 1; --k)
        if (!find_dependent(find_dependent, 0, k))
            return m - k;
    return m;
}

// Reference WAFOM: the over-points product formula evaluated digit by digit.
// Works for any n (multi-word digit rows); single-threaded on purpose so it
// can serve as the oracle for the table-driven path.
inline double wafom(const DigitalNet& net, int q = 2) {
    detail::check_wafom_base(q);
    std::vector<long double> fplus, fminus;
    detail::walsh_factors(net.n, q, fplus, fminus);
    const int W = (net.n + 63) / 64;
    PointRowEnumerator en(net);
    PairwiseAccumulator<long double> acc;
    en.run(0, net.point_count(),
           [&](std::uint64_t, std::span<const std::uint64_t> y) {
               long double prod = 1.0L;
               for (int i = 0; i < net.s; ++i)
                   for (int b = 0; b < net.n; ++b) {
                       const bool bit =
                           (y[static_cast<std::size_t>(i) * W + b / 64] >> (b % 64)) & 1u;
                       prod *= bit ? fminus[b] : fplus[b];
                   }
               acc.add(prod - 1.0L);
           });
    return static_cast<double>(std::ldexp(acc.total(), -net.m));
}

// Table-driven WAFOM: per-point work drops to s * ceil(n/8) lookups in
// 256-entry digit-chunk product tables. Bit-identical for any thread count:
// points are cut into fixed 2^chunk_log blocks, each block is summed with
// its own pairwise accumulator, and block totals combine in block order.
inline double wafom_fast(const DigitalNet& net, int q = 2, int threads = 1) {
    detail::check_wafom_base(q);
    if (net.n > 64)
        throw std::invalid_argument("wafom_fast: n <= 64 required");
    if (threads < 1)
        throw std::invalid_argument("wafom_fast: threads >= 1 required");

    std::vector<long double> fplus, fminus;
    detail::walsh_factors(net.n, q, fplus, fminus);
    const int chunks = (net.n + 7) / 8;
    std::vector<std::array<long double, 256>> tab(chunks);
    for (int c = 0; c < chunks; ++c)
        for (int byte = 0; byte < 256; ++byte) {
            long double p = 1.0L;
            for (int k = 0; k < 8; ++k) {
                const int b = 8 * c + k;
                if (b >= net.n)
                    break;
                p *= ((byte >> k) & 1) ? fminus[b] : fplus[b];
            }
            tab[c][byte] = p;
        }

    PointWordEnumerator en(net);
    const int chunk_log = std::min(net.m, 12);
    const std::uint64_t n_blocks = net.point_count() >> chunk_log;
    std::vector<long double> block_total(n_blocks);
    parallel_chunks(static_cast<std::size_t>(n_blocks), threads, [&](std::size_t bi) {
        PairwiseAccumulator<long double> acc;
        en.run(static_cast<std::uint64_t>(bi) << chunk_log,
               static_cast<std::uint64_t>(bi + 1) << chunk_log,
               [&](std::uint64_t, std::span<const std::uint64_t> y) {
                   long double prod = 1.0L;
                   for (int i = 0; i < net.s; ++i) {
                       const std::uint64_t w = y[i];
                       for (int c = 0; c < chunks; ++c)
                           prod *= tab[c][(w >> (8 * c)) & 0xFF];
                   }
                   acc.add(prod - 1.0L);
               });
        block_total[bi] = acc.total();
    });
    PairwiseAccumulator<long double> top;
    for (const long double v : block_total)
        top.add(v);
    return static_cast<double>(std::ldexp(top.total(), -net.m));
}

// Dual-space WAFOM oracle: enumerates the nonzero vectors of the dual code
// P^perp inside F_2^(s*n) and sums q^-mu'(A) directly, mu' giving digit j of
// dimension i the weight j+1. Exponential in s*n, hence the s*n <= 24 bound;
// it exists to cross-check the two point-space paths on small nets.
inline double wafom_dual_oracle(const DigitalNet& net, int q = 2) {
    detail::check_wafom_base(q);
    const int sn = net.s * net.n;
    if (sn > 24)
        throw std::invalid_argument("wafom_dual_oracle: s*n <= 24 required, got " +
                                    std::to_string(sn));

    // row l of the code's generator: digits of the point at h = 2^l,
    // flattened as bit i*n + j for digit j+1 of dimension i
    std::vector<std::uint32_t> gen_rows(net.m, 0);
    for (int l = 0; l < net.m; ++l) {
        std::uint32_t row = 0;
        for (int i = 0; i < net.s; ++i)
            for (int r = 0; r < net.n; ++r)
                if (net.gen[i].get(r, l))
                    row |= std::uint32_t{1} << (i * net.n + r);
        gen_rows[l] = row;
    }

    // null space of the m x sn generator matrix via RREF
    std::vector<std::uint32_t> rref(gen_rows);
    std::vector<int> pivot_col;
    {
        int r = 0;
        for (int c = 0; c < sn && r < net.m; ++c) {
            int p = -1;
            for (int rr = r; rr < net.m; ++rr)
                if ((rref[rr] >> c) & 1u) {
                    p = rr;
                    break;
                }
            if (p < 0)
                continue;
            std::swap(rref[r], rref[p]);
            for (int rr = 0; rr < net.m; ++rr)
                if (rr != r && ((rref[rr] >> c) & 1u))
                    rref[rr] ^= rref[r];
            pivot_col.push_back(c);
            ++r;
        }
    }
    std::vector<bool> is_pivot(sn, false);
    for (const int c : pivot_col)
        is_pivot[c] = true;
    std::vector<std::uint32_t> null_basis;
    for (int f = 0; f < sn; ++f) {
        if (is_pivot[f])
            continue;
        std::uint32_t v = std::uint32_t{1} << f;
        for (std::size_t r = 0; r < pivot_col.size(); ++r)
            if ((rref[r] >> f) & 1u)
                v |= std::uint32_t{1} << pivot_col[r];
        null_basis.push_back(v);
    }

    // weight of bit b of the flattened vector: digit index within its
    // dimension plus 2 (that is, mu' contribution j+1 for digit j)
    std::array<int, 32> bit_weight{};
    for (int b = 0; b < sn; ++b)
        bit_weight[b] = b % net.n + 2;

    const int lq = detail::log2_base(q);
    KahanAccumulator<long double> sum;
    const std::size_t d = null_basis.size();
    std::uint32_t A = 0;
    for (std::uint64_t g = 1; g < (std::uint64_t{1} << d); ++g) {
        A ^= null_basis[std::countr_zero(g)]; // Gray-code walk of the dual
        std::uint32_t rem = A;
        int mu = 0;
        while (rem) {
            mu += bit_weight[std::countr_zero(rem)];
            rem &= rem - 1;
        }
        sum.add(std::ldexp(1.0L, -lq * mu));
    }
    return static_cast<double>(sum.total());
}

// Whether the stacked (s*n) x m matrix has rank m, i.e. distinct indices h
// give distinct points.
inline bool has_full_column_rank(const DigitalNet& net) {
    if (net.m == 0)
        return true;
    GF2Matrix stacked(net.s * net.n, net.m);
    for (int i = 0; i < net.s; ++i)
        for (int r = 0; r < net.n; ++r) {
            auto src = net.gen[i].row(r);
            auto dst = stacked.row(i * net.n + r);
            std::copy(src.begin(), src.end(), dst.begin());
        }
    return stacked.rank() == net.m;
}

struct QualityReport {
    int t = 0;
    double wafom = 0.0;
    int q = 2;
    int s = 0;
    int m = 0;
    int n = 0;
    bool full_column_rank = false;
};

inline QualityReport quality_report(const DigitalNet& net, int q = 2, int threads = 1) {
    QualityReport rep;
    rep.q = q;
    rep.s = net.s;
    rep.m = net.m;
    rep.n = net.n;
    rep.t = t_value(net);
    rep.wafom = net.n <= 64 ? wafom_fast(net, q, threads) : wafom(net, q);
    rep.full_column_rank = has_full_column_rank(net);
    return rep;
}

} // namespace qmcnet
