#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmcnet/rng.hpp"

namespace qmcnet {

inline std::uint64_t reverse_bits64(std::uint64_t x) {
    x = ((x >> 1) & 0x5555555555555555ULL) | ((x & 0x5555555555555555ULL) << 1);
    x = ((x >> 2) & 0x3333333333333333ULL) | ((x & 0x3333333333333333ULL) << 2);
    x = ((x >> 4) & 0x0F0F0F0F0F0F0F0FULL) | ((x & 0x0F0F0F0F0F0F0F0FULL) << 4);
    return __builtin_bswap64(x);
}

// Bit-packed matrix over GF(2).
//
// Storage is row-major: each row occupies ceil(cols/64) words and column c
// (0-based) lives in bit c%64 of word c/64, so column 0 is the least
// significant bit of a row's first word. Padding bits past `cols` in the
// last word of every row are kept zero; all operations preserve this.
class GF2Matrix {
public:
    using Word = std::uint64_t;
    static constexpr int kWordBits = 64;

    GF2Matrix() = default;

    GF2Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
        if (rows < 0 || cols < 0)
            throw std::invalid_argument("GF2Matrix: negative dimensions");
        words_per_row_ = (cols + kWordBits - 1) / kWordBits;
        bits_.assign(static_cast<std::size_t>(rows) * words_per_row_, 0);
    }

    static GF2Matrix identity(int n) {
        GF2Matrix m(n, n);
        for (int i = 0; i < n; ++i)
            m.set(i, i, true);
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int words_per_row() const { return words_per_row_; }

    bool get(int r, int c) const {
        assert(in_range(r, c));
        return (bits_[word_index(r, c)] >> (c % kWordBits)) & 1u;
    }

    void set(int r, int c, bool v) {
        assert(in_range(r, c));
        const Word mask = Word{1} << (c % kWordBits);
        if (v)
            bits_[word_index(r, c)] |= mask;
        else
            bits_[word_index(r, c)] &= ~mask;
    }

    std::span<const Word> row(int r) const {
        assert(r >= 0 && r < rows_);
        return {bits_.data() + static_cast<std::size_t>(r) * words_per_row_,
                static_cast<std::size_t>(words_per_row_)};
    }

    std::span<Word> row(int r) {
        assert(r >= 0 && r < rows_);
        return {bits_.data() + static_cast<std::size_t>(r) * words_per_row_,
                static_cast<std::size_t>(words_per_row_)};
    }

    // Row packed into one word; valid only when cols <= 64.
    Word row_word(int r) const {
        assert(cols_ <= kWordBits);
        return words_per_row_ == 0 ? 0 : row(r)[0];
    }

    friend bool operator==(const GF2Matrix&, const GF2Matrix&) = default;

    GF2Matrix operator*(const GF2Matrix& rhs) const {
        if (cols_ != rhs.rows_)
            throw std::invalid_argument("GF2 multiply: shape mismatch " +
                                        shape_str() + " * " + rhs.shape_str());
        GF2Matrix out(rows_, rhs.cols_);
        for (int r = 0; r < rows_; ++r) {
            auto dst = out.row(r);
            auto lhs = row(r);
            for (std::size_t w = 0; w < lhs.size(); ++w) {
                Word rem = lhs[w];
                while (rem) {
                    const int k = static_cast<int>(w) * kWordBits + std::countr_zero(rem);
                    rem &= rem - 1;
                    auto src = rhs.row(k);
                    for (std::size_t j = 0; j < src.size(); ++j)
                        dst[j] ^= src[j];
                }
            }
        }
        return out;
    }

    GF2Matrix transposed() const {
        GF2Matrix out(cols_, rows_);
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c)
                if (get(r, c))
                    out.set(c, r, true);
        return out;
    }

    // Rank over GF(2); the matrix itself is left untouched.
    int rank() const {
        if (rows_ == 0 || cols_ == 0)
            return 0;
        std::vector<std::vector<Word>> basis;
        std::vector<int> pivot;
        std::vector<Word> cur;
        for (int r = 0; r < rows_; ++r) {
            auto src = row(r);
            cur.assign(src.begin(), src.end());
            for (std::size_t b = 0; b < basis.size(); ++b) {
                const int p = pivot[b];
                if ((cur[p / kWordBits] >> (p % kWordBits)) & 1u)
                    for (int w = 0; w < words_per_row_; ++w)
                        cur[w] ^= basis[b][w];
            }
            const int p = first_set_bit(cur);
            if (p >= 0) {
                basis.push_back(cur);
                pivot.push_back(p);
            }
        }
        return static_cast<int>(basis.size());
    }

    bool is_lower_triangular_unit_diag() const {
        if (rows_ != cols_ || rows_ == 0)
            return false;
        for (int r = 0; r < rows_; ++r) {
            if (!get(r, r))
                return false;
            for (int c = r + 1; c < cols_; ++c)
                if (get(r, c))
                    return false;
        }
        return true;
    }

    bool padding_ok() const {
        if (words_per_row_ == 0 || cols_ % kWordBits == 0)
            return true;
        const Word live = (Word{1} << (cols_ % kWordBits)) - 1;
        for (int r = 0; r < rows_; ++r)
            if (row(r).back() & ~live)
                return false;
        return true;
    }

    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

private:
    bool in_range(int r, int c) const {
        return r >= 0 && r < rows_ && c >= 0 && c < cols_;
    }

    std::size_t word_index(int r, int c) const {
        return static_cast<std::size_t>(r) * words_per_row_ + c / kWordBits;
    }

    static int first_set_bit(const std::vector<Word>& v) {
        for (std::size_t w = 0; w < v.size(); ++w)
            if (v[w])
                return static_cast<int>(w) * kWordBits + std::countr_zero(v[w]);
        return -1;
    }

    int rows_ = 0;
    int cols_ = 0;
    int words_per_row_ = 0;
    std::vector<Word> bits_;
};

// Uniform draw from the group of non-singular lower triangular matrices:
// unit diagonal, every strictly-lower entry an independent fair bit. Row r
// consumes ceil(r/64) words from `rng` (rows in increasing order), so the
// draw sequence is part of the reproducibility contract.
inline GF2Matrix random_lower_triangular(int n, SplitMix64& rng) {
    if (n < 1)
        throw std::invalid_argument("random_lower_triangular: n >= 1 required");
    GF2Matrix L(n, n);
    for (int r = 0; r < n; ++r) {
        auto dst = L.row(r);
        for (int base = 0; base < r; base += GF2Matrix::kWordBits) {
            const int take = std::min(GF2Matrix::kWordBits, r - base);
            GF2Matrix::Word w = rng.next();
            if (take < GF2Matrix::kWordBits)
                w &= (GF2Matrix::Word{1} << take) - 1;
            dst[base / GF2Matrix::kWordBits] |= w;
        }
        L.set(r, r, true);
    }
    return L;
}

} // namespace qmcnet
