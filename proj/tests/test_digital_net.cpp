#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "qmcnet/digital_net.hpp"
#include "qmcnet/rng.hpp"

using qmcnet::DigitalNet;
using qmcnet::GF2Matrix;
using qmcnet::PointBits;
using qmcnet::ScrambleSet;
using qmcnet::SplitMix64;

namespace {

DigitalNet random_net(int s, int m, int n, SplitMix64& rng) {
    std::vector<GF2Matrix> gen;
    for (int i = 0; i < s; ++i) {
        GF2Matrix C(n, m);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < m; ++c)
                C.set(r, c, rng.next() & 1u);
        gen.push_back(std::move(C));
    }
    return DigitalNet(s, m, n, std::move(gen));
}

DigitalNet identity_net(int n) {
    return DigitalNet(1, n, n, {GF2Matrix::identity(n)});
}

} // namespace

TEST_CASE("constructor validates shapes and ranges", "[digital_net]") {
    CHECK_THROWS_AS(DigitalNet(0, 1, 1, {}), std::invalid_argument);
    CHECK_THROWS_AS(DigitalNet(1, 1, 0, {GF2Matrix(0, 1)}), std::invalid_argument);
    CHECK_THROWS_AS(DigitalNet(1, -1, 1, {GF2Matrix(1, 0)}), std::invalid_argument);
    CHECK_THROWS_AS(DigitalNet(1, 63, 63, {GF2Matrix(63, 63)}), std::invalid_argument);
    CHECK_THROWS_AS(DigitalNet(2, 1, 1, {GF2Matrix(1, 1)}), std::invalid_argument);
    CHECK_THROWS_AS(DigitalNet(1, 2, 3, {GF2Matrix(2, 3)}), std::invalid_argument);
    CHECK_NOTHROW(DigitalNet(1, 0, 1, {GF2Matrix(1, 0)})); // one-point net
}

TEST_CASE("identity net reproduces the van der Corput points", "[digital_net]") {
    const DigitalNet net = identity_net(3);
    // index digits reversed into the fraction, plus the 2^-(n+1) shift
    std::vector<double> got;
    for (std::uint64_t h = 0; h < 8; ++h)
        got.push_back(qmcnet::to_real(qmcnet::point(net, h))[0]);
    const std::vector<double> want = {0.5 / 8,  4.5 / 8, 2.5 / 8, 6.5 / 8,
                                      1.5 / 8, 5.5 / 8, 3.5 / 8, 7.5 / 8};
    CHECK(got == want);
}

TEST_CASE("point rejects out-of-range index", "[digital_net]") {
    const DigitalNet net = identity_net(3);
    CHECK_THROWS_AS(qmcnet::point(net, 8), std::out_of_range);
}

TEST_CASE("digits are GF(2)-linear in the index", "[digital_net]") {
    SplitMix64 rng(11);
    const DigitalNet net = random_net(3, 5, 9, rng);
    for (int trial = 0; trial < 50; ++trial) {
        const std::uint64_t h1 = rng.next() % 32, h2 = rng.next() % 32;
        const PointBits a = qmcnet::point(net, h1);
        const PointBits b = qmcnet::point(net, h2);
        const PointBits c = qmcnet::point(net, h1 ^ h2);
        for (int i = 0; i < net.s; ++i)
            for (int j = 0; j < net.n; ++j)
                REQUIRE((a.x.get(i, j) ^ b.x.get(i, j)) == c.x.get(i, j));
    }
}

TEST_CASE("to_real lands strictly inside (0,1) and is exact for n <= 52",
          "[digital_net]") {
    SplitMix64 rng(12);
    const DigitalNet net = random_net(2, 6, 40, rng);
    for (std::uint64_t h = 0; h < net.point_count(); ++h) {
        const PointBits p = qmcnet::point(net, h);
        const auto x = qmcnet::to_real(p);
        for (int i = 0; i < net.s; ++i) {
            REQUIRE(x[i] > 0.0);
            REQUIRE(x[i] < 1.0);
            // reconstruct digits from the value: exactness check
            double v = x[i];
            for (int j = 0; j < net.n; ++j) {
                v *= 2.0;
                const bool bit = v >= 1.0;
                if (bit)
                    v -= 1.0;
                REQUIRE(bit == p.x.get(i, j));
            }
            REQUIRE(v == Catch::Approx(0.5)); // the residual half-cell shift
        }
    }
}

TEST_CASE("to_real clamps all-ones digits below 1.0 at n = 64", "[digital_net]") {
    GF2Matrix C(64, 1);
    for (int r = 0; r < 64; ++r)
        C.set(r, 0, true);
    const DigitalNet net(1, 1, 64, {C});
    const auto x = qmcnet::to_real(qmcnet::point(net, 1));
    CHECK(x[0] < 1.0);
    CHECK(x[0] > 0.999999);
}

TEST_CASE("word and row enumerators match point()", "[digital_net]") {
    SplitMix64 rng(13);
    for (const int n : {5, 32, 64}) {
        const DigitalNet net = random_net(3, 6, n, rng);
        qmcnet::PointWordEnumerator we(net);
        std::uint64_t visited = 0;
        we.run(0, net.point_count(), [&](std::uint64_t h, auto y) {
            const PointBits p = qmcnet::point(net, h);
            for (int i = 0; i < net.s; ++i)
                REQUIRE(y[i] == p.x.row_word(i));
            ++visited;
        });
        REQUIRE(visited == net.point_count());
    }

    // multi-word coordinates
    const DigitalNet wide = random_net(2, 5, 96, rng);
    qmcnet::PointRowEnumerator re(wide);
    REQUIRE(re.words_per_dim() == 2);
    re.run(0, wide.point_count(), [&](std::uint64_t h, auto y) {
        const PointBits p = qmcnet::point(wide, h);
        for (int i = 0; i < wide.s; ++i) {
            REQUIRE(y[2 * i] == p.x.row(i)[0]);
            REQUIRE(y[2 * i + 1] == p.x.row(i)[1]);
        }
    });

    // partial ranges resume mid-stream correctly
    qmcnet::PointWordEnumerator part(random_net(2, 6, 16, rng));
    std::vector<std::uint64_t> all, split;
    part.run(0, 64, [&](std::uint64_t, auto y) { all.push_back(y[0] ^ y[1]); });
    part.run(0, 17, [&](std::uint64_t, auto y) { split.push_back(y[0] ^ y[1]); });
    part.run(17, 64, [&](std::uint64_t, auto y) { split.push_back(y[0] ^ y[1]); });
    CHECK(all == split);
}

TEST_CASE("identity scrambling is a no-op", "[digital_net]") {
    SplitMix64 rng(14);
    const DigitalNet net = random_net(3, 4, 10, rng);
    const DigitalNet same = qmcnet::scramble(net, qmcnet::identity_scramble_set(3, 10));
    for (int i = 0; i < net.s; ++i)
        CHECK(same.gen[i] == net.gen[i]);
}

TEST_CASE("scrambling composes by matrix product", "[digital_net]") {
    SplitMix64 rng(15);
    const DigitalNet net = random_net(2, 4, 8, rng);
    const ScrambleSet L1 = qmcnet::random_scramble_set(2, 8, rng);
    const ScrambleSet L2 = qmcnet::random_scramble_set(2, 8, rng);
    const DigitalNet twice = qmcnet::scramble(qmcnet::scramble(net, L1), L2);
    std::vector<GF2Matrix> prod;
    for (int i = 0; i < 2; ++i)
        prod.push_back(L2.mats[i] * L1.mats[i]);
    const DigitalNet combined = qmcnet::scramble(net, ScrambleSet(2, 8, prod));
    for (int i = 0; i < 2; ++i)
        CHECK(twice.gen[i] == combined.gen[i]);
}

TEST_CASE("scramble validates dimensions", "[digital_net]") {
    SplitMix64 rng(16);
    const DigitalNet net = random_net(2, 3, 8, rng);
    CHECK_THROWS_AS(qmcnet::scramble(net, qmcnet::identity_scramble_set(2, 9)),
                    std::invalid_argument);
    CHECK_THROWS_AS(qmcnet::scramble(net, qmcnet::identity_scramble_set(3, 8)),
                    std::invalid_argument);
}

TEST_CASE("scramble set constructor enforces lower triangular unit diagonal",
          "[digital_net]") {
    GF2Matrix bad = GF2Matrix::identity(4);
    bad.set(0, 3, true);
    CHECK_THROWS_AS(ScrambleSet(1, 4, {bad}), std::invalid_argument);
}

TEST_CASE("interlacing builds round-robin row blocks", "[digital_net]") {
    // two 2x2 matrices, alpha=2: rows must alternate A row 1, B row 1, ...
    GF2Matrix A(2, 2), B(2, 2);
    A.set(0, 0, true);
    A.set(1, 1, true);
    B.set(0, 1, true);
    B.set(1, 0, true);
    const std::vector<GF2Matrix> in = {A, B};
    const auto out = qmcnet::interlace(in, 2);
    REQUIRE(out.size() == 1);
    REQUIRE(out[0].rows() == 4);
    REQUIRE(out[0].cols() == 2);
    CHECK(out[0].row_word(0) == A.row_word(0));
    CHECK(out[0].row_word(1) == B.row_word(0));
    CHECK(out[0].row_word(2) == A.row_word(1));
    CHECK(out[0].row_word(3) == B.row_word(1));

    // alpha=1 is the identity transform
    const auto same = qmcnet::interlace(in, 1);
    REQUIRE(same.size() == 2);
    CHECK(same[0] == A);
    CHECK(same[1] == B);

    CHECK_THROWS_AS(qmcnet::interlace(in, 3), std::invalid_argument);
    const std::vector<GF2Matrix> uneven = {A, GF2Matrix(3, 3)};
    CHECK_THROWS_AS(qmcnet::interlace(uneven, 2), std::invalid_argument);
}

TEST_CASE("net files round-trip", "[digital_net]") {
    SplitMix64 rng(17);
    for (const auto [s, m, n] : {std::array{1, 0, 1}, std::array{2, 3, 4},
                                 std::array{3, 6, 32}, std::array{2, 4, 70}}) {
        const DigitalNet net = random_net(s, m, n, rng);
        std::stringstream ss;
        qmcnet::write_net(ss, net);
        const DigitalNet back = qmcnet::read_net(ss);
        REQUIRE(back.s == net.s);
        REQUIRE(back.m == net.m);
        REQUIRE(back.n == net.n);
        for (int i = 0; i < s; ++i)
            REQUIRE(back.gen[i] == net.gen[i]);
    }
}

TEST_CASE("net parse errors carry line numbers and block indices", "[digital_net]") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return qmcnet::read_net(in);
    };
    auto message_of = [&](const std::string& text) -> std::string {
        try {
            parse(text);
            return "";
        } catch (const std::runtime_error& e) {
            return e.what();
        }
    };

    CHECK(message_of("").find("line 1") != std::string::npos);
    CHECK(message_of("2 4\n").find("header") != std::string::npos);
    CHECK(message_of("1 1 1\nx\n").find("invalid character 'x'") != std::string::npos);
    CHECK(message_of("1 1 1\nx\n").find("line 2") != std::string::npos);
    CHECK(message_of("1 2 3\n111\n11\n").find("expected 3 characters, got 2") !=
          std::string::npos);

    // header promises two matrices; only one block present -> names block 2
    const std::string one_block = "2 4 3\n000\n000\n000\n000\n\n";
    const std::string msg = message_of(one_block);
    CHECK(msg.find("matrix 2 of 2") != std::string::npos);

    // missing blank separator between blocks
    const std::string no_gap = "2 1 1\n0\n1\n";
    CHECK(message_of(no_gap).find("blank line") != std::string::npos);

    // trailing garbage after the last block
    const std::string trailing = "1 1 1\n0\n\nleftover\n";
    CHECK(message_of(trailing).find("trailing content") != std::string::npos);

    // well-formed input parses
    CHECK_NOTHROW(parse("2 1 1\n0\n\n1\n"));
}

TEST_CASE("scramble files round-trip and validate triangularity", "[digital_net]") {
    SplitMix64 rng(18);
    const ScrambleSet set = qmcnet::random_scramble_set(3, 9, rng);
    std::stringstream ss;
    qmcnet::write_scramble_set(ss, set);
    const ScrambleSet back = qmcnet::read_scramble_set(ss);
    REQUIRE(back.s == set.s);
    REQUIRE(back.n == set.n);
    for (int i = 0; i < set.s; ++i)
        CHECK(back.mats[i] == set.mats[i]);

    std::istringstream upper("1 2\n11\n01\n");
    try {
        qmcnet::read_scramble_set(upper);
        FAIL("expected parse error");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("not lower triangular") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }

    std::istringstream zero_diag("1 2\n10\n10\n");
    CHECK_THROWS_WITH(qmcnet::read_scramble_set(zero_diag),
                      Catch::Matchers::ContainsSubstring("unit diagonal"));
}

TEST_CASE("random scramble sets are deterministic in the stream", "[digital_net]") {
    SplitMix64 a(21), b(21);
    const ScrambleSet sa = qmcnet::random_scramble_set(4, 16, a);
    const ScrambleSet sb = qmcnet::random_scramble_set(4, 16, b);
    for (int i = 0; i < 4; ++i)
        CHECK(sa.mats[i] == sb.mats[i]);
}
