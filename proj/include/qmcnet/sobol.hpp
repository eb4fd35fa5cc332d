#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmcnet/digital_net.hpp"
#include "qmcnet/gf2.hpp"

namespace qmcnet {

// One row of a Joe/Kuo style direction-number table: dimension index d >= 2,
// the degree of the primitive polynomial, its middle coefficients packed
// into `a` (degree-1 bits, highest-order coefficient first), and the odd
// initial values m_1 .. m_degree.
struct DirectionEntry {
    int d = 0;
    int degree = 0;
    std::uint32_t a = 0;
    std::vector<std::uint64_t> m_init;
};

// Parses the usual text layout: one header line (ignored), then one line per
// dimension: "d degree a m_1 ... m_degree". Entries are returned sorted by d
// and validated (m_k odd, m_k < 2^(k+1), no duplicate dimensions).
inline std::vector<DirectionEntry> parse_direction_numbers(
    std::istream& in, const std::string& what = "direction-number file") {
    detail::LineReader lr{in};
    std::string line;
    if (!lr.next(line))
        detail::parse_fail(what, 1, "empty file, expected a header line");
    std::vector<DirectionEntry> out;
    while (lr.next(line)) {
        if (detail::is_blank(line))
            continue;
        std::istringstream ls(line);
        DirectionEntry e;
        if (!(ls >> e.d >> e.degree >> e.a))
            detail::parse_fail(what, lr.lineno, "expected 'd degree a m_1 ... m_degree'");
        if (e.d < 2)
            detail::parse_fail(what, lr.lineno,
                               "dimension index must be >= 2, got " + std::to_string(e.d));
        if (e.degree < 1 || e.degree > 62)
            detail::parse_fail(what, lr.lineno,
                               "degree out of range: " + std::to_string(e.degree));
        e.m_init.resize(e.degree);
        for (int k = 0; k < e.degree; ++k) {
            if (!(ls >> e.m_init[k]))
                detail::parse_fail(what, lr.lineno,
                                   "expected " + std::to_string(e.degree) +
                                       " initial values for dimension " +
                                       std::to_string(e.d));
            if (e.m_init[k] % 2 == 0 ||
                e.m_init[k] >= (std::uint64_t{1} << (k + 2)))
                detail::parse_fail(what, lr.lineno,
                                   "m_" + std::to_string(k + 1) + "=" +
                                       std::to_string(e.m_init[k]) +
                                       " must be odd and < 2^" + std::to_string(k + 2));
        }
        std::string extra;
        if (ls >> extra)
            detail::parse_fail(what, lr.lineno, "trailing content after initial values");
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(),
              [](const DirectionEntry& a, const DirectionEntry& b) { return a.d < b.d; });
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].d == out[i - 1].d)
            throw std::runtime_error(what + ": duplicate entry for dimension " +
                                     std::to_string(out[i].d));
    return out;
}

inline std::vector<DirectionEntry> load_direction_numbers(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open direction-number file: " + path.string());
    return parse_direction_numbers(in, "direction-number file " +
                                           path.filename().string());
}

// Builds the generating matrices of the first s Sobol' dimensions with n
// output digits and m columns. Dimension 1 is the van der Corput identity;
// dimension d >= 2 expands the direction numbers v_k = m_k * 2^(n-k) by
//
//   v_k = v_{k-e} ^ (v_{k-e} >> e) ^ sum_{i=1}^{e-1} a_i * v_{k-i},  k > e,
//
// where e is the polynomial degree and a_i its middle coefficients. Column
// k of C_d holds the digits of v_k, so the top m x m block comes out upper
// triangular with unit diagonal (checked).
inline DigitalNet build_sobol(std::span<const DirectionEntry> table, int s, int m,
                              int n) {
    if (s < 1)
        throw std::invalid_argument("build_sobol: s >= 1 required");
    if (m < 1 || n < m)
        throw std::invalid_argument("build_sobol: 1 <= m <= n required (m=" +
                                    std::to_string(m) + ", n=" + std::to_string(n) + ")");
    if (n > 64)
        throw std::invalid_argument("build_sobol: n <= 64 required");

    std::vector<GF2Matrix> gen;
    gen.reserve(s);
    gen.push_back(GF2Matrix(n, m));
    for (int k = 0; k < m; ++k)
        gen[0].set(k, k, true); // van der Corput: identity on the top block

    std::size_t ti = 0;
    std::vector<std::uint64_t> v(m);
    for (int d = 2; d <= s; ++d) {
        while (ti < table.size() && table[ti].d < d)
            ++ti;
        if (ti == table.size() || table[ti].d != d)
            throw std::invalid_argument("build_sobol: no direction numbers for dimension " +
                                        std::to_string(d));
        const DirectionEntry& e = table[ti];
        const int deg = e.degree;
        // v_k as an n-digit value, most significant digit at bit n-1
        for (int k = 1; k <= m; ++k) {
            if (k <= deg) {
                v[k - 1] = e.m_init[k - 1] << (n - k);
            } else {
                std::uint64_t x = v[k - deg - 1] ^ (v[k - deg - 1] >> deg);
                for (int i = 1; i < deg; ++i)
                    if ((e.a >> (deg - 1 - i)) & 1u)
                        x ^= v[k - i - 1];
                v[k - 1] = x;
            }
        }
        GF2Matrix C(n, m);
        for (int k = 0; k < m; ++k)
            for (int r = 0; r < n; ++r)
                if ((v[k] >> (n - 1 - r)) & 1u)
                    C.set(r, k, true);
        gen.push_back(std::move(C));
    }

    DigitalNet net(s, m, n, std::move(gen));
    // structural guarantee of the construction; a violation means bad input
    for (int i = 0; i < s; ++i)
        for (int k = 0; k < m; ++k) {
            if (!net.gen[i].get(k, k))
                throw std::runtime_error("build_sobol: dimension " + std::to_string(i + 1) +
                                         " lost its unit diagonal (bad table?)");
            for (int r = k + 1; r < m; ++r)
                if (net.gen[i].get(r, k))
                    throw std::runtime_error("build_sobol: dimension " +
                                             std::to_string(i + 1) +
                                             " top block is not upper triangular");
        }
    return net;
}

inline DigitalNet build_sobol(const std::filesystem::path& table_path, int s, int m,
                              int n) {
    const auto table = load_direction_numbers(table_path);
    return build_sobol(table, s, m, n);
}

} // namespace qmcnet
