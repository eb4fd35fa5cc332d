#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmcnet/gf2.hpp"
#include "qmcnet/rng.hpp"

namespace qmcnet {

// A digital net over GF(2): s generating matrices, each n x m. Column l
// (0-based) of C_i multiplies bit l of the point index h (bit 0 = the bit
// that flips fastest); row r produces output digit r+1 of coordinate i,
// i.e. the digit of weight 2^-(r+1).
struct DigitalNet {
    int s = 0;
    int m = 0;
    int n = 0;
    std::vector<GF2Matrix> gen;

    DigitalNet() = default;

    DigitalNet(int s_, int m_, int n_, std::vector<GF2Matrix> gen_)
        : s(s_), m(m_), n(n_), gen(std::move(gen_)) {
        if (s < 1)
            throw std::invalid_argument("DigitalNet: s >= 1 required");
        if (n < 1)
            throw std::invalid_argument("DigitalNet: n >= 1 required");
        // m = 0 is the one-point net; it is allowed so that quality scores
        // have a well-defined base case.
        if (m < 0 || m > 62)
            throw std::invalid_argument("DigitalNet: 0 <= m <= 62 required");
        if (static_cast<int>(gen.size()) != s)
            throw std::invalid_argument("DigitalNet: expected " + std::to_string(s) +
                                        " generating matrices, got " +
                                        std::to_string(gen.size()));
        for (const auto& C : gen)
            if (C.rows() != n || C.cols() != m)
                throw std::invalid_argument("DigitalNet: generating matrix is " +
                                            C.shape_str() + ", expected " +
                                            std::to_string(n) + "x" + std::to_string(m));
    }

    std::uint64_t point_count() const { return std::uint64_t{1} << m; }

    friend bool operator==(const DigitalNet&, const DigitalNet&) = default;
};

// Digit expansion of one net point: s rows of n digits, entry (i, b) being
// digit b+1 of coordinate i.
struct PointBits {
    GF2Matrix x;
};

// One lower-triangular scrambling matrix per dimension.
struct ScrambleSet {
    int s = 0;
    int n = 0;
    std::vector<GF2Matrix> mats;

    ScrambleSet() = default;

    ScrambleSet(int s_, int n_, std::vector<GF2Matrix> mats_)
        : s(s_), n(n_), mats(std::move(mats_)) {
        if (s < 1 || n < 1)
            throw std::invalid_argument("ScrambleSet: s >= 1 and n >= 1 required");
        if (static_cast<int>(mats.size()) != s)
            throw std::invalid_argument("ScrambleSet: expected " + std::to_string(s) +
                                        " matrices, got " + std::to_string(mats.size()));
        for (const auto& L : mats) {
            if (L.rows() != n || L.cols() != n)
                throw std::invalid_argument("ScrambleSet: matrix is " + L.shape_str() +
                                            ", expected " + std::to_string(n) + "x" +
                                            std::to_string(n));
            if (!L.is_lower_triangular_unit_diag())
                throw std::invalid_argument(
                    "ScrambleSet: matrix is not lower triangular with unit diagonal");
        }
    }
};

inline ScrambleSet identity_scramble_set(int s, int n) {
    return ScrambleSet(s, n, std::vector<GF2Matrix>(s, GF2Matrix::identity(n)));
}

// Draws the s matrices from a single stream, dimension 1 first.
inline ScrambleSet random_scramble_set(int s, int n, SplitMix64& rng) {
    std::vector<GF2Matrix> mats;
    mats.reserve(s);
    for (int i = 0; i < s; ++i)
        mats.push_back(random_lower_triangular(n, rng));
    return ScrambleSet(s, n, std::move(mats));
}

inline PointBits point(const DigitalNet& net, std::uint64_t h) {
    if (h >= net.point_count())
        throw std::out_of_range("point: index " + std::to_string(h) +
                                " out of range for m=" + std::to_string(net.m));
    PointBits p{GF2Matrix(net.s, net.n)};
    for (int i = 0; i < net.s; ++i) {
        auto dst = p.x.row(i);
        const GF2Matrix& C = net.gen[i];
        for (int l = 0; l < net.m; ++l) {
            if (!((h >> l) & 1u))
                continue;
            // dst ^= column l of C_i, laid out as digits along the row
            for (int r = 0; r < net.n; ++r)
                if (C.get(r, l))
                    dst[r / GF2Matrix::kWordBits] ^=
                        GF2Matrix::Word{1} << (r % GF2Matrix::kWordBits);
        }
    }
    return p;
}

// Radical-inverse value of one digit row plus the half-cell shift 2^-(n+1);
// always strictly inside (0, 1). Exact in double for n <= 52.
inline double coordinate_value(std::span<const GF2Matrix::Word> row_bits, int n) {
    long double v = 0.0L;
    for (std::size_t w = 0; w < row_bits.size(); ++w)
        if (row_bits[w])
            v += std::ldexp(static_cast<long double>(reverse_bits64(row_bits[w])),
                            -64 * (static_cast<int>(w) + 1));
    v += std::ldexp(1.0L, -(n + 1));
    double d = static_cast<double>(v);
    if (d >= 1.0)
        d = std::nextafter(1.0, 0.0);
    return d;
}

inline std::vector<double> to_real(const PointBits& p) {
    std::vector<double> out(p.x.rows());
    for (int i = 0; i < p.x.rows(); ++i)
        out[i] = coordinate_value(p.x.row(i), p.x.cols());
    return out;
}

inline DigitalNet scramble(const DigitalNet& net, const ScrambleSet& L) {
    if (L.s != net.s || L.n != net.n)
        throw std::invalid_argument("scramble: net has s=" + std::to_string(net.s) +
                                    ", n=" + std::to_string(net.n) +
                                    " but scramble set has s=" + std::to_string(L.s) +
                                    ", n=" + std::to_string(L.n));
    std::vector<GF2Matrix> gen;
    gen.reserve(net.s);
    for (int i = 0; i < net.s; ++i)
        gen.push_back(L.mats[i] * net.gen[i]);
    return DigitalNet(net.s, net.m, net.n, std::move(gen));
}

// Digit interlacing: groups of alpha consecutive m x m matrices become one
// (m*alpha) x m matrix whose row r (0-based) is row r/alpha of the
// (r%alpha)-th matrix in the group.
inline std::vector<GF2Matrix> interlace(std::span<const GF2Matrix> mats, int alpha) {
    if (alpha < 1)
        throw std::invalid_argument("interlace: alpha >= 1 required");
    if (mats.empty() || mats.size() % static_cast<std::size_t>(alpha) != 0)
        throw std::invalid_argument("interlace: matrix count " +
                                    std::to_string(mats.size()) +
                                    " is not a positive multiple of alpha=" +
                                    std::to_string(alpha));
    const int m = mats[0].rows();
    for (const auto& M : mats)
        if (M.rows() != m || M.cols() != m)
            throw std::invalid_argument("interlace: expected square " +
                                        std::to_string(m) + "x" + std::to_string(m) +
                                        " matrices, got " + M.shape_str());
    std::vector<GF2Matrix> out;
    const int s_out = static_cast<int>(mats.size()) / alpha;
    out.reserve(s_out);
    for (int k = 0; k < s_out; ++k) {
        GF2Matrix D(m * alpha, m);
        for (int r = 0; r < m * alpha; ++r) {
            auto src = mats[static_cast<std::size_t>(k) * alpha + r % alpha].row(r / alpha);
            auto dst = D.row(r);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        out.push_back(std::move(D));
    }
    return out;
}

// Streams y_i(h) = C_i h for consecutive h, one word per coordinate (bit b
// holds digit b+1). Stepping h -> h+1 costs one column XOR per changed
// index bit, amortized O(1) columns per point. Requires n <= 64.
class PointWordEnumerator {
public:
    explicit PointWordEnumerator(const DigitalNet& net) : s_(net.s), m_(net.m) {
        if (net.n > 64)
            throw std::invalid_argument("PointWordEnumerator: n <= 64 required");
        cols_.assign(static_cast<std::size_t>(s_) * std::max(m_, 1), 0);
        for (int i = 0; i < s_; ++i)
            for (int l = 0; l < m_; ++l) {
                std::uint64_t col = 0;
                for (int r = 0; r < net.n; ++r)
                    if (net.gen[i].get(r, l))
                        col |= std::uint64_t{1} << r;
                cols_[static_cast<std::size_t>(i) * m_ + l] = col;
            }
    }

    int dims() const { return s_; }

    // visit(h, y) for h in [begin, end); y is a span of s words.
    template <typename Visit>
    void run(std::uint64_t begin, std::uint64_t end, Visit&& visit) const {
        std::vector<std::uint64_t> y(s_, 0);
        for (int l = 0; l < m_; ++l)
            if ((begin >> l) & 1u)
                xor_column(l, y.data());
        const std::uint64_t live =
            m_ == 0 ? 0 : (m_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m_) - 1);
        for (std::uint64_t h = begin; h < end; ++h) {
            visit(h, std::span<const std::uint64_t>(y.data(), y.size()));
            std::uint64_t flip = (h ^ (h + 1)) & live;
            while (flip) {
                xor_column(std::countr_zero(flip), y.data());
                flip &= flip - 1;
            }
        }
    }

private:
    void xor_column(int l, std::uint64_t* y) const {
        const std::uint64_t* col = cols_.data() + l;
        for (int i = 0; i < s_; ++i)
            y[i] ^= col[static_cast<std::size_t>(i) * m_];
    }

    int s_;
    int m_;
    std::vector<std::uint64_t> cols_;
};

// Same idea for arbitrary n: each coordinate is ceil(n/64) words.
class PointRowEnumerator {
public:
    explicit PointRowEnumerator(const DigitalNet& net)
        : s_(net.s), m_(net.m), words_(std::max(1, (net.n + 63) / 64)) {
        cols_.assign(static_cast<std::size_t>(s_) * std::max(m_, 1) * words_, 0);
        for (int i = 0; i < s_; ++i)
            for (int l = 0; l < m_; ++l) {
                std::uint64_t* col = column(i, l);
                for (int r = 0; r < net.n; ++r)
                    if (net.gen[i].get(r, l))
                        col[r / 64] |= std::uint64_t{1} << (r % 64);
            }
    }

    int words_per_dim() const { return words_; }

    // visit(h, y) with y holding s * words_per_dim() words, dimension-major.
    template <typename Visit>
    void run(std::uint64_t begin, std::uint64_t end, Visit&& visit) const {
        std::vector<std::uint64_t> y(static_cast<std::size_t>(s_) * words_, 0);
        for (int l = 0; l < m_; ++l)
            if ((begin >> l) & 1u)
                xor_column(l, y.data());
        const std::uint64_t live =
            m_ == 0 ? 0 : (m_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m_) - 1);
        for (std::uint64_t h = begin; h < end; ++h) {
            visit(h, std::span<const std::uint64_t>(y.data(), y.size()));
            std::uint64_t flip = (h ^ (h + 1)) & live;
            while (flip) {
                xor_column(std::countr_zero(flip), y.data());
                flip &= flip - 1;
            }
        }
    }

private:
    std::uint64_t* column(int i, int l) {
        return cols_.data() + (static_cast<std::size_t>(i) * std::max(m_, 1) + l) * words_;
    }

    void xor_column(int l, std::uint64_t* y) const {
        for (int i = 0; i < s_; ++i) {
            const std::uint64_t* col =
                cols_.data() + (static_cast<std::size_t>(i) * m_ + l) * words_;
            std::uint64_t* dst = y + static_cast<std::size_t>(i) * words_;
            for (int w = 0; w < words_; ++w)
                dst[w] ^= col[w];
        }
    }

    int s_;
    int m_;
    int words_;
    std::vector<std::uint64_t> cols_;
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& what, int lineno,
                                    const std::string& msg) {
    throw std::runtime_error(what + " line " + std::to_string(lineno) + ": " + msg);
}

// Pulls lines one at a time, tolerating CRLF endings.
struct LineReader {
    std::istream& in;
    int lineno = 0;

    bool next(std::string& s) {
        if (!std::getline(in, s))
            return false;
        ++lineno;
        if (!s.empty() && s.back() == '\r')
            s.pop_back();
        return true;
    }
};

inline bool is_blank(const std::string& s) {
    return s.find_first_not_of(" \t") == std::string::npos;
}

// Reads one block of `rows` binary rows into `M` starting at column digit 0.
template <typename Check>
inline GF2Matrix read_bit_block(LineReader& lr, const std::string& what, int block,
                                int blocks, int rows, int cols, Check&& check) {
    GF2Matrix M(rows, cols);
    std::string line;
    for (int r = 0; r < rows; ++r) {
        if (!lr.next(line))
            parse_fail(what, lr.lineno + 1,
                       "unexpected end of file in matrix " + std::to_string(block) +
                           " of " + std::to_string(blocks) + " (need " +
                           std::to_string(rows) + " rows)");
        if (static_cast<int>(line.size()) != cols)
            parse_fail(what, lr.lineno,
                       "matrix " + std::to_string(block) + " row " + std::to_string(r + 1) +
                           ": expected " + std::to_string(cols) + " characters, got " +
                           std::to_string(line.size()));
        for (int c = 0; c < cols; ++c) {
            if (line[c] != '0' && line[c] != '1')
                parse_fail(what, lr.lineno,
                           std::string("invalid character '") + line[c] +
                               "' (rows must be 0/1 strings)");
            if (line[c] == '1')
                M.set(r, c, true);
        }
        check(M, r, lr.lineno);
    }
    return M;
}

inline void expect_blank_separator(LineReader& lr, const std::string& what) {
    std::string line;
    if (!lr.next(line))
        parse_fail(what, lr.lineno + 1, "expected one blank line between matrix blocks");
    if (!is_blank(line))
        parse_fail(what, lr.lineno, "expected one blank line between matrix blocks");
}

inline void expect_trailing_blank(LineReader& lr, const std::string& what) {
    std::string line;
    while (lr.next(line))
        if (!is_blank(line))
            parse_fail(what, lr.lineno, "trailing content after last matrix");
}

} // namespace detail

// Net file format: a header line "s n m", then s blocks of n rows of m
// characters from {0,1}, blocks separated by exactly one blank line. Row 1
// of a block is the most significant output digit; column 1 multiplies the
// lowest bit of the point index.
inline DigitalNet read_net(std::istream& in, const std::string& what = "net file") {
    detail::LineReader lr{in};
    std::string line;
    if (!lr.next(line))
        detail::parse_fail(what, 1, "empty file, expected header 's n m'");
    int s = 0, n = 0, m = 0;
    {
        std::istringstream hs(line);
        std::string extra;
        if (!(hs >> s >> n >> m) || (hs >> extra))
            detail::parse_fail(what, lr.lineno, "malformed header, expected 's n m'");
    }
    if (s < 1 || n < 1 || m < 0 || m > 62)
        detail::parse_fail(what, lr.lineno,
                           "invalid dimensions s=" + std::to_string(s) + " n=" +
                               std::to_string(n) + " m=" + std::to_string(m));
    std::vector<GF2Matrix> gen;
    gen.reserve(s);
    for (int i = 0; i < s; ++i) {
        if (i > 0)
            detail::expect_blank_separator(lr, what);
        gen.push_back(detail::read_bit_block(lr, what, i + 1, s, n, m,
                                             [](const GF2Matrix&, int, int) {}));
    }
    detail::expect_trailing_blank(lr, what);
    return DigitalNet(s, m, n, std::move(gen));
}

inline void write_net(std::ostream& out, const DigitalNet& net) {
    out << net.s << ' ' << net.n << ' ' << net.m << '\n';
    for (int i = 0; i < net.s; ++i) {
        if (i > 0)
            out << '\n';
        for (int r = 0; r < net.n; ++r) {
            for (int c = 0; c < net.m; ++c)
                out << (net.gen[i].get(r, c) ? '1' : '0');
            out << '\n';
        }
    }
}

inline DigitalNet load_net(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open net file: " + path.string());
    return read_net(in, "net file " + path.filename().string());
}

inline void save_net(const DigitalNet& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write net file: " + path.string());
    write_net(out, net);
}

// Scramble file format: header "s n", then s blocks of n rows of n
// characters, blocks separated by one blank line. Each block must be lower
// triangular with unit diagonal; violations are reported with the offending
// line number.
inline ScrambleSet read_scramble_set(std::istream& in,
                                     const std::string& what = "scramble file") {
    detail::LineReader lr{in};
    std::string line;
    if (!lr.next(line))
        detail::parse_fail(what, 1, "empty file, expected header 's n'");
    int s = 0, n = 0;
    {
        std::istringstream hs(line);
        std::string extra;
        if (!(hs >> s >> n) || (hs >> extra))
            detail::parse_fail(what, lr.lineno, "malformed header, expected 's n'");
    }
    if (s < 1 || n < 1)
        detail::parse_fail(what, lr.lineno,
                           "invalid dimensions s=" + std::to_string(s) + " n=" +
                               std::to_string(n));
    std::vector<GF2Matrix> mats;
    mats.reserve(s);
    for (int i = 0; i < s; ++i) {
        if (i > 0)
            detail::expect_blank_separator(lr, what);
        auto check = [i, n](const GF2Matrix& M, int r, int lineno) {
            if (!M.get(r, r))
                detail::parse_fail("scramble file", lineno,
                                   "matrix " + std::to_string(i + 1) +
                                       " is not unit diagonal at row " +
                                       std::to_string(r + 1));
            for (int c = r + 1; c < n; ++c)
                if (M.get(r, c))
                    detail::parse_fail("scramble file", lineno,
                                       "matrix " + std::to_string(i + 1) +
                                           " is not lower triangular at row " +
                                           std::to_string(r + 1));
        };
        mats.push_back(detail::read_bit_block(lr, what, i + 1, s, n, n, check));
    }
    detail::expect_trailing_blank(lr, what);
    return ScrambleSet(s, n, std::move(mats));
}

inline void write_scramble_set(std::ostream& out, const ScrambleSet& set) {
    out << set.s << ' ' << set.n << '\n';
    for (int i = 0; i < set.s; ++i) {
        if (i > 0)
            out << '\n';
        for (int r = 0; r < set.n; ++r) {
            for (int c = 0; c < set.n; ++c)
                out << (set.mats[i].get(r, c) ? '1' : '0');
            out << '\n';
        }
    }
}

inline ScrambleSet load_scramble_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open scramble file: " + path.string());
    return read_scramble_set(in, "scramble file " + path.filename().string());
}

inline void save_scramble_set(const ScrambleSet& set, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write scramble file: " + path.string());
    write_scramble_set(out, set);
}

} // namespace qmcnet
