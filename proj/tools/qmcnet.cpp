// qmcnet: digital nets over GF(2) — points, quality scores, scrambling
// search and Genz integration benchmarks from one binary.
//
// Exit codes: 0 success, 2 usage/validation error, 1 internal error.
// Every subcommand is deterministic given its flags; all randomness is
// seeded and --threads never changes output bytes.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmcnet/qmcnet.hpp"

namespace {

using json = nlohmann::ordered_json;

// input/validation problems exit 2; anything thrown later exits 1
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NetSourceFlags {
    std::string net_file;
    std::string dirs_file;
    int s = 0;
    int n = 32;
};

CLI::Option* add_net_source(CLI::App* cmd, NetSourceFlags& src, int& m) {
    auto* net = cmd->add_option("--net", src.net_file,
                                "Net file (header 's n m', then s blocks of n rows "
                                "of m binary digits)");
    auto* dirs = cmd->add_option("--sobol-dirs", src.dirs_file,
                                 "Joe-Kuo style direction-number table; builds the "
                                 "first --s Sobol' dimensions");
    auto* s_opt = cmd->add_option("--s", src.s, "Dimension count (with --sobol-dirs)");
    auto* n_opt =
        cmd->add_option("--n", src.n, "Output digits per coordinate (with --sobol-dirs)")
            ->default_val(32);
    net->excludes(dirs)->excludes(s_opt)->excludes(n_opt);
    dirs->needs(s_opt);
    return cmd->add_option("--m", m, "log2 of the point count");
}

// rethrows file open/parse problems as usage errors (exit 2)
template <typename F>
auto load_input(F&& f) {
    try {
        return f();
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
}

qmcnet::DigitalNet resolve_net(const NetSourceFlags& src, std::optional<int> m) {
    if (!src.net_file.empty()) {
        qmcnet::DigitalNet net = load_input([&] { return qmcnet::load_net(src.net_file); });
        if (m && *m != net.m)
            throw UsageError("--m " + std::to_string(*m) + " does not match net file (m=" +
                             std::to_string(net.m) + ")");
        return net;
    }
    if (src.dirs_file.empty())
        throw UsageError("a net source is required: --net FILE or --sobol-dirs FILE --s S");
    if (!m)
        throw UsageError("--m is required with --sobol-dirs");
    return load_input([&] {
        return qmcnet::build_sobol(std::filesystem::path(src.dirs_file), src.s, *m, src.n);
    });
}

int thread_default() {
    if (const char* env = std::getenv("QMCNET_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1)
            return v;
    }
    return 1;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty())
        return std::cout;
    file.open(path);
    if (!file)
        throw UsageError("cannot open output file: " + path);
    return file;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(tok, &used);
            if (used != tok.size())
                throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw UsageError(flag + ": cannot parse '" + tok + "' as an integer");
        }
    }
    if (out.empty())
        throw UsageError(flag + ": empty list");
    return out;
}

// ---------------------------------------------------------------- points --

struct PointsArgs {
    NetSourceFlags src;
    int m = 0;
    std::optional<int> m_given;
    std::uint64_t count = 0; // 0 = all
    std::string out_path;
};

int run_points(const PointsArgs& a) {
    const qmcnet::DigitalNet net = resolve_net(a.src, a.m_given);
    if (net.m > net.n)
        throw UsageError("points: m <= n required (m=" + std::to_string(net.m) +
                         ", n=" + std::to_string(net.n) + ")");
    std::uint64_t count = net.point_count();
    if (a.count != 0) {
        if (a.count > count)
            throw UsageError("--count exceeds point count 2^m");
        count = a.count;
    }
    std::ofstream file;
    std::ostream& out = open_out(file, a.out_path);
    char buf[40];
    for (std::uint64_t h = 0; h < count; ++h) {
        const auto x = qmcnet::to_real(qmcnet::point(net, h));
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", x[i]);
            out << (i ? " " : "") << buf;
        }
        out << '\n';
    }
    return 0;
}

// --------------------------------------------------------------- quality --

struct QualityArgs {
    NetSourceFlags src;
    int m = 0;
    std::optional<int> m_given;
    int q = 2;
    bool verify_dual = false;
    int threads = 1;
};

int run_quality(const QualityArgs& a) {
    const qmcnet::DigitalNet net = resolve_net(a.src, a.m_given);
    if (net.m > net.n)
        throw UsageError("quality: m <= n required");
    if (a.verify_dual && net.s * net.n > 24)
        throw UsageError("--verify-dual requires s*n <= 24 (got " +
                         std::to_string(net.s * net.n) + ")");
    const qmcnet::QualityReport rep = qmcnet::quality_report(net, a.q, a.threads);
    if (a.verify_dual) {
        const double w_ref = qmcnet::wafom(net, a.q);
        const double w_dual = qmcnet::wafom_dual_oracle(net, a.q);
        const double scale = std::max({std::abs(rep.wafom), std::abs(w_ref),
                                       std::abs(w_dual)});
        if (std::abs(w_ref - rep.wafom) > 1e-12 * scale ||
            std::abs(w_dual - rep.wafom) > 1e-12 * scale)
            throw std::runtime_error("WAFOM paths disagree beyond 1e-12: fast=" +
                                     std::to_string(rep.wafom) + " reference=" +
                                     std::to_string(w_ref) + " dual=" +
                                     std::to_string(w_dual));
    }
    json j;
    j["t"] = rep.t;
    j["wafom"] = rep.wafom;
    j["q"] = rep.q;
    j["s"] = rep.s;
    j["m"] = rep.m;
    j["n"] = rep.n;
    j["full_column_rank"] = rep.full_column_rank;
    std::cout << j.dump(2) << '\n';
    return 0;
}

// ---------------------------------------------------------------- search --

struct SearchArgs {
    NetSourceFlags src;
    int m = 0;
    std::optional<int> m_given;
    std::uint64_t M = 1000;
    std::uint64_t seed = 0;
    int q = 2;
    std::string objective = "minimize";
    bool include_identity = true;
    std::string out_scramble;
    std::string out_trace;
    std::string out_net;
    int threads = 1;
};

int run_search(const SearchArgs& a) {
    const qmcnet::DigitalNet net = resolve_net(a.src, a.m_given);
    if (net.m > net.n)
        throw UsageError("search: m <= n required");
    qmcnet::SearchConfig cfg;
    cfg.candidates = a.M;
    cfg.seed = a.seed;
    cfg.q = a.q;
    cfg.include_identity = a.include_identity;
    cfg.objective = a.objective == "maximize" ? qmcnet::Objective::maximize
                                              : qmcnet::Objective::minimize;
    cfg.threads = a.threads;
    const qmcnet::SearchResult res = qmcnet::scramble_search(net, cfg);
    const double unscrambled = qmcnet::wafom_fast(net, a.q);

    if (!a.out_scramble.empty())
        qmcnet::save_scramble_set(res.best_scramble, a.out_scramble);
    if (!a.out_net.empty())
        qmcnet::save_net(res.best_net, a.out_net);
    if (!a.out_trace.empty()) {
        std::ofstream tr(a.out_trace);
        if (!tr)
            throw UsageError("cannot open output file: " + a.out_trace);
        for (const auto& [idx, w] : res.trace) {
            json line;
            line["candidate"] = idx;
            line["wafom"] = w;
            tr << line.dump() << '\n';
        }
    }

    json j;
    j["s"] = net.s;
    j["n"] = net.n;
    j["m"] = net.m;
    j["q"] = a.q;
    j["M"] = a.M;
    j["seed"] = a.seed;
    j["objective"] = a.objective;
    j["include_identity"] = a.include_identity;
    j["t"] = qmcnet::t_value(net);
    j["unscrambled_wafom"] = unscrambled;
    j["candidate_index"] = res.candidate_index;
    j["best_wafom"] = res.best_wafom;
    j["improvements"] = res.trace.size();
    std::cout << j.dump(2) << '\n';
    return 0;
}

// ------------------------------------------------------------------ genz --

struct GenzArgs {
    std::string dirs_file;
    int s = 0;
    int n = 32;
    std::string m_range;
    std::string families = "1,2,3,4,5,6";
    std::string nets = "sobol,scrambled:1000";
    int samples = 20;
    std::uint64_t seed = 0;
    std::string out_path;
    int threads = 1;
};

// scramble searches inside `genz` draw from their own seed so the candidate
// stream cannot collide with the instance streams keyed by (seed, family)
std::uint64_t derived_search_seed(std::uint64_t seed) {
    return qmcnet::SplitMix64::substream(seed, 0x7363726dULL).next();
}

int run_genz(const GenzArgs& a) {
    if (a.dirs_file.empty())
        throw UsageError("genz: --sobol-dirs is required");
    if (a.s < 1)
        throw UsageError("genz: --s >= 1 is required");
    std::vector<int> m_values;
    {
        int lo = 0, hi = 0;
        try {
            const auto colon = a.m_range.find(':');
            std::size_t used = 0;
            if (colon == std::string::npos) {
                lo = hi = std::stoi(a.m_range, &used);
                if (used != a.m_range.size())
                    throw std::invalid_argument(a.m_range);
            } else {
                lo = std::stoi(a.m_range.substr(0, colon), &used);
                if (used != colon)
                    throw std::invalid_argument(a.m_range);
                const std::string rest = a.m_range.substr(colon + 1);
                hi = std::stoi(rest, &used);
                if (used != rest.size())
                    throw std::invalid_argument(a.m_range);
            }
        } catch (const std::exception&) {
            throw UsageError("--m-range: expected 'LO:HI' or a single value, got '" +
                             a.m_range + "'");
        }
        if (lo < 1 || hi < lo)
            throw UsageError("--m-range: need 1 <= LO <= HI");
        for (int m = lo; m <= hi; ++m)
            m_values.push_back(m);
    }
    const std::vector<int> families = parse_int_list(a.families, "--families");
    for (const int f : families)
        if (f < 1 || f > 6)
            throw UsageError("--families: family indices must be in 1..6");
    if (a.samples < 1)
        throw UsageError("--samples >= 1 required");

    const auto table =
        load_input([&] { return qmcnet::load_direction_numbers(a.dirs_file); });
    std::vector<qmcnet::DigitalNet> sobol_nets;
    sobol_nets.reserve(m_values.size());
    for (const int m : m_values) {
        if (m > a.n)
            throw UsageError("genz: every m must satisfy m <= n");
        sobol_nets.push_back(qmcnet::build_sobol(table, a.s, m, a.n));
    }

    std::vector<qmcnet::NetFamily> net_families;
    std::stringstream ss(a.nets);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty())
            throw UsageError("--nets: empty spec");
        std::string label = tok.substr(0, tok.find(':')), spec = tok;
        if (const auto eq = tok.find('='); eq != std::string::npos) {
            label = tok.substr(0, eq);
            spec = tok.substr(eq + 1);
        }
        qmcnet::NetFamily nf;
        nf.label = label;
        if (spec == "sobol") {
            nf.nets = sobol_nets;
        } else if (spec.rfind("scrambled:", 0) == 0) {
            std::uint64_t M = 0;
            try {
                M = std::stoull(spec.substr(10));
            } catch (const std::exception&) {
                throw UsageError("--nets: bad candidate count in '" + tok + "'");
            }
            if (M < 1)
                throw UsageError("--nets: scrambled:M needs M >= 1");
            qmcnet::SearchConfig cfg;
            cfg.candidates = M;
            cfg.seed = derived_search_seed(a.seed);
            cfg.q = 2;
            cfg.threads = a.threads;
            for (const auto& net : sobol_nets)
                nf.nets.push_back(qmcnet::scramble_search(net, cfg).best_net);
        } else {
            throw UsageError("--nets: unknown spec '" + spec +
                             "' (expected 'sobol' or 'scrambled:M')");
        }
        net_families.push_back(std::move(nf));
    }
    if (net_families.empty())
        throw UsageError("--nets: need at least one net spec");

    const auto results = qmcnet::run_bench(net_families, families, a.s, m_values,
                                           a.samples, a.seed, a.threads);
    std::ofstream file;
    std::ostream& out = open_out(file, a.out_path);
    qmcnet::write_bench_csv(out, results);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"digital nets over GF(2): points, t-value/WAFOM quality, "
                 "WAFOM-driven scrambling search, Genz integration benchmarks"};
    app.require_subcommand(1);

    PointsArgs pa;
    auto* points = app.add_subcommand("points", "Print the net's points in h-order "
                                                "(17 significant digits)");
    auto* points_m = add_net_source(points, pa.src, pa.m);
    points_m->required();
    points->add_option("--count", pa.count, "Emit only the first COUNT points");
    points->add_option("--out", pa.out_path, "Output file (default: stdout)");

    QualityArgs qa;
    auto* quality = app.add_subcommand("quality", "Print t-value and WAFOM as JSON");
    auto* quality_m = add_net_source(quality, qa.src, qa.m);
    quality->add_option("--q", qa.q, "WAFOM base (2 or 4)")
        ->default_val(2)
        ->check(CLI::IsMember({2, 4}));
    quality->add_flag("--verify-dual", qa.verify_dual,
                      "Cross-check all three WAFOM paths (needs s*n <= 24); "
                      "disagreement beyond 1e-12 is an internal error");
    quality->add_option("--threads", qa.threads, "Worker threads (env QMCNET_THREADS)")
        ->default_val(thread_default())
        ->check(CLI::PositiveNumber);

    SearchArgs sa;
    auto* search = app.add_subcommand(
        "search", "Random lower-triangular scrambling search on WAFOM");
    auto* search_m = add_net_source(search, sa.src, sa.m);
    search->add_option("--M", sa.M, "Number of random scramble candidates")
        ->default_val(1000);
    search->add_option("--seed", sa.seed, "Search seed (candidate i uses substream "
                                          "(seed, i))")
        ->default_val(0);
    search->add_option("--q", sa.q, "WAFOM base (2 or 4)")
        ->default_val(2)
        ->check(CLI::IsMember({2, 4}));
    search->add_option("--objective", sa.objective, "minimize (default) or maximize")
        ->default_val("minimize")
        ->check(CLI::IsMember({"minimize", "maximize"}));
    search->add_flag("--include-identity,!--no-include-identity", sa.include_identity,
                     "Score the unscrambled net as candidate 0 (default on)");
    search->add_option("--out-scramble", sa.out_scramble,
                       "Write the winning scramble set to this file");
    search->add_option("--out-net", sa.out_net,
                       "Write the winning scrambled net to this file");
    search->add_option("--out-trace", sa.out_trace,
                       "Write improvement trace as JSON lines");
    search->add_option("--threads", sa.threads, "Worker threads (env QMCNET_THREADS)")
        ->default_val(thread_default())
        ->check(CLI::PositiveNumber);

    GenzArgs ga;
    auto* genz = app.add_subcommand(
        "genz", "Genz test-function benchmark over an m sweep; CSV output");
    genz->add_option("--sobol-dirs", ga.dirs_file, "Direction-number table")->required();
    genz->add_option("--s", ga.s, "Dimension count")->required();
    genz->add_option("--n", ga.n, "Output digits per coordinate")->default_val(32);
    genz->add_option("--m-range", ga.m_range, "Inclusive range LO:HI (or single m)")
        ->required();
    genz->add_option("--families", ga.families, "Comma-separated Genz families (1..6)")
        ->default_val("1,2,3,4,5,6");
    genz->add_option("--nets", ga.nets,
                     "Comma-separated net specs: [label=]sobol | [label=]scrambled:M "
                     "(default labels: sobol, scrambled)")
        ->default_val("sobol,scrambled:1000");
    genz->add_option("--samples", ga.samples, "Instances per family")->default_val(20);
    genz->add_option("--seed", ga.seed, "Instance seed (family f uses substream "
                                        "(seed, f))")
        ->default_val(0);
    genz->add_option("--out", ga.out_path, "CSV output file (default: stdout)");
    genz->add_option("--threads", ga.threads, "Worker threads (env QMCNET_THREADS)")
        ->default_val(thread_default())
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (points_m->count())
        pa.m_given = pa.m;
    if (quality_m->count())
        qa.m_given = qa.m;
    if (search_m->count())
        sa.m_given = sa.m;

    try {
        if (points->parsed())
            return run_points(pa);
        if (quality->parsed())
            return run_quality(qa);
        if (search->parsed())
            return run_search(sa);
        if (genz->parsed())
            return run_genz(ga);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
