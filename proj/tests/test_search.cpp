#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qmcnet/quality.hpp"
#include "qmcnet/rng.hpp"
#include "qmcnet/search.hpp"
#include "qmcnet/sobol.hpp"

using qmcnet::DigitalNet;
using qmcnet::GF2Matrix;
using qmcnet::Objective;
using qmcnet::ScrambleSet;
using qmcnet::SearchConfig;
using qmcnet::SearchResult;
using qmcnet::SplitMix64;

namespace {

DigitalNet sobol_net(int s, int m, int n = 32) {
    static const auto table = qmcnet::load_direction_numbers(
        std::string(QMCNET_DATA_DIR) + "/new-joe-kuo-6.250.txt");
    return qmcnet::build_sobol(table, s, m, n);
}

bool same_result(const SearchResult& a, const SearchResult& b) {
    if (a.candidate_index != b.candidate_index || a.best_wafom != b.best_wafom)
        return false;
    if (a.trace != b.trace)
        return false;
    for (int i = 0; i < a.best_net.s; ++i)
        if (!(a.best_net.gen[i] == b.best_net.gen[i]))
            return false;
    return true;
}

} // namespace

TEST_CASE("search is deterministic for fixed config", "[search]") {
    const DigitalNet net = sobol_net(3, 6, 16);
    SearchConfig cfg;
    cfg.candidates = 50;
    cfg.seed = 2718;
    const SearchResult a = qmcnet::scramble_search(net, cfg);
    const SearchResult b = qmcnet::scramble_search(net, cfg);
    CHECK(same_result(a, b));
}

TEST_CASE("search result is independent of thread count", "[search]") {
    const DigitalNet net = sobol_net(4, 7, 24);
    SearchConfig cfg;
    cfg.candidates = 40;
    cfg.seed = 99;
    cfg.threads = 1;
    const SearchResult t1 = qmcnet::scramble_search(net, cfg);
    cfg.threads = 3;
    const SearchResult t3 = qmcnet::scramble_search(net, cfg);
    cfg.threads = 8;
    const SearchResult t8 = qmcnet::scramble_search(net, cfg);
    CHECK(same_result(t1, t3));
    CHECK(same_result(t1, t8));
}

TEST_CASE("identity inclusion caps best_wafom at the unscrambled value",
          "[search]") {
    SplitMix64 seeds(404);
    for (int trial = 0; trial < 10; ++trial) {
        const DigitalNet net = sobol_net(3, 5, 12);
        SearchConfig cfg;
        cfg.candidates = 8;
        cfg.seed = seeds.next();
        const SearchResult res = qmcnet::scramble_search(net, cfg);
        REQUIRE(res.best_wafom <= qmcnet::wafom_fast(net));
    }
}

TEST_CASE("winner matches an independent argmin over regenerated candidates",
          "[search]") {
    // re-derives every candidate from its substream and reproduces the
    // selection rule (extremal value, smallest index wins ties)
    const DigitalNet net = sobol_net(3, 6, 16);
    SearchConfig cfg;
    cfg.candidates = 30;
    cfg.seed = 777;
    const SearchResult res = qmcnet::scramble_search(net, cfg);

    std::uint64_t best_idx = 0;
    double best = qmcnet::wafom_fast(net, cfg.q);
    for (std::uint64_t i = 1; i <= cfg.candidates; ++i) {
        auto rng = SplitMix64::substream(cfg.seed, i);
        const ScrambleSet L = qmcnet::random_scramble_set(net.s, net.n, rng);
        const double w = qmcnet::wafom_fast(qmcnet::scramble(net, L), cfg.q);
        if (w < best) {
            best = w;
            best_idx = i;
        }
    }
    CHECK(res.candidate_index == best_idx);
    CHECK(res.best_wafom == best);
}

TEST_CASE("objective maximize picks the other extreme", "[search]") {
    const DigitalNet net = sobol_net(3, 6, 16);
    SearchConfig cfg;
    cfg.candidates = 25;
    cfg.seed = 31337;
    const SearchResult lo = qmcnet::scramble_search(net, cfg);
    cfg.objective = Objective::maximize;
    const SearchResult hi = qmcnet::scramble_search(net, cfg);
    CHECK(lo.best_wafom <= hi.best_wafom);
}

TEST_CASE("trace is monotone and ends at the winner", "[search]") {
    const DigitalNet net = sobol_net(4, 8, 20);
    SearchConfig cfg;
    cfg.candidates = 60;
    cfg.seed = 5;
    const SearchResult res = qmcnet::scramble_search(net, cfg);
    REQUIRE_FALSE(res.trace.empty());
    CHECK(res.trace.front().first == 0); // identity scored first
    for (std::size_t k = 1; k < res.trace.size(); ++k) {
        REQUIRE(res.trace[k].second < res.trace[k - 1].second);
        REQUIRE(res.trace[k].first > res.trace[k - 1].first);
    }
    CHECK(res.trace.back().first == res.candidate_index);
    CHECK(res.trace.back().second == res.best_wafom);
}

TEST_CASE("scrambling preserves the t-value through the search", "[search]") {
    for (const int m : {4, 6}) {
        const DigitalNet net = sobol_net(3, m, 16);
        const int t0 = qmcnet::t_value(net);
        SearchConfig cfg;
        cfg.candidates = 15;
        cfg.seed = 1234 + m;
        const SearchResult res = qmcnet::scramble_search(net, cfg);
        CHECK(qmcnet::t_value(res.best_net) == t0);
        // and the reported net really is the reported scramble applied
        const DigitalNet redo = qmcnet::scramble(net, res.best_scramble);
        for (int i = 0; i < net.s; ++i)
            CHECK(redo.gen[i] == res.best_net.gen[i]);
    }
}

TEST_CASE("identity wins with a single bad candidate", "[search]") {
    // a raw Sobol' net loses to nearly every random scramble, so start from an
    // already-optimized net: a fresh random rescramble of it is almost surely
    // worse. Scan for a seed that confirms it, then check the search keeps
    // candidate 0.
    SearchConfig pre;
    pre.candidates = 50;
    pre.seed = 99;
    const DigitalNet net = qmcnet::scramble_search(sobol_net(3, 6, 16), pre).best_net;
    const double w0 = qmcnet::wafom_fast(net);
    std::uint64_t bad_seed = 0;
    bool found = false;
    for (std::uint64_t seed = 0; seed < 200 && !found; ++seed) {
        auto rng = SplitMix64::substream(seed, 1);
        const double w1 = qmcnet::wafom_fast(
            qmcnet::scramble(net, qmcnet::random_scramble_set(net.s, net.n, rng)));
        if (w1 > w0) {
            bad_seed = seed;
            found = true;
        }
    }
    REQUIRE(found);
    SearchConfig cfg;
    cfg.candidates = 1;
    cfg.seed = bad_seed;
    const SearchResult res = qmcnet::scramble_search(net, cfg);
    CHECK(res.candidate_index == 0);
    CHECK(res.best_wafom == w0);
}

TEST_CASE("excluding the identity forces a scrambled winner", "[search]") {
    const DigitalNet net = sobol_net(3, 5, 12);
    SearchConfig cfg;
    cfg.candidates = 10;
    cfg.seed = 808;
    cfg.include_identity = false;
    const SearchResult res = qmcnet::scramble_search(net, cfg);
    CHECK(res.candidate_index >= 1);
    CHECK(res.trace.front().first == 1);
}

TEST_CASE("search validates its inputs", "[search]") {
    const DigitalNet net = sobol_net(2, 4, 8);
    SearchConfig cfg;
    cfg.candidates = 0;
    CHECK_THROWS_AS(qmcnet::scramble_search(net, cfg), std::invalid_argument);
}

TEST_CASE("naive column search grows deterministic nets", "[search]") {
    const auto nets = qmcnet::naive_column_search(3, 12, 5, 20, 424242);
    REQUIRE(nets.size() == 5);
    for (int k = 0; k < 5; ++k) {
        CHECK(nets[k].m == k + 1);
        CHECK(nets[k].s == 3);
        CHECK(nets[k].n == 12);
        // prefix property: step k+1 keeps the first k columns
        if (k > 0)
            for (int i = 0; i < 3; ++i)
                for (int r = 0; r < 12; ++r)
                    for (int c = 0; c < k; ++c)
                        REQUIRE(nets[k].gen[i].get(r, c) == nets[k - 1].gen[i].get(r, c));
    }
    const auto again = qmcnet::naive_column_search(3, 12, 5, 20, 424242);
    for (int k = 0; k < 5; ++k)
        for (int i = 0; i < 3; ++i)
            CHECK(nets[k].gen[i] == again[k].gen[i]);

    // different seeds explore different columns
    const auto other = qmcnet::naive_column_search(3, 12, 5, 20, 7);
    bool any_diff = false;
    for (int i = 0; i < 3; ++i)
        any_diff = any_diff || !(nets[4].gen[i] == other[4].gen[i]);
    CHECK(any_diff);

    CHECK_THROWS_AS(qmcnet::naive_column_search(0, 8, 4, 5, 1), std::invalid_argument);
    CHECK_THROWS_AS(qmcnet::naive_column_search(2, 8, 9, 5, 1), std::invalid_argument);
}

TEST_CASE("naive columns are never the all-zero tuple", "[search]") {
    const auto nets = qmcnet::naive_column_search(2, 6, 6, 3, 11);
    const DigitalNet& last = nets.back();
    for (int c = 0; c < last.m; ++c) {
        bool any = false;
        for (int i = 0; i < 2; ++i)
            for (int r = 0; r < 6; ++r)
                any = any || last.gen[i].get(r, c);
        REQUIRE(any);
    }
}
