#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "qmcnet/digital_net.hpp"
#include "qmcnet/reduce.hpp"
#include "qmcnet/rng.hpp"

namespace qmcnet {

// Default difficulty budgets sum(a_i) = h per family (oscillatory, product
// peak, corner peak, Gaussian, C0, discontinuous).
inline constexpr std::array<double, 6> kGenzDefaultH = {4.5, 3.625, 0.925,
                                                        3.515, 10.2, 2.15};

struct GenzInstance {
    int family = 0;            // 1..6
    std::vector<double> a;     // positive difficulty parameters
    std::vector<double> u;     // shift parameters in [0,1)
    double exact = 0.0;        // closed-form integral over [0,1]^s
};

inline double genz_eval(const GenzInstance& g, std::span<const double> x) {
    const std::size_t s = g.a.size();
    switch (g.family) {
    case 1: {
        double arg = 2.0 * std::numbers::pi * g.u[0];
        for (std::size_t i = 0; i < s; ++i)
            arg += g.a[i] * x[i];
        return std::cos(arg);
    }
    case 2: {
        double p = 1.0;
        for (std::size_t i = 0; i < s; ++i) {
            const double d = x[i] - g.u[i];
            p *= 1.0 / (1.0 / (g.a[i] * g.a[i]) + d * d);
        }
        return p;
    }
    case 3: {
        double base = 1.0;
        for (std::size_t i = 0; i < s; ++i)
            base += g.a[i] * x[i];
        return std::pow(base, -static_cast<double>(s) - 1.0);
    }
    case 4: {
        double e = 0.0;
        for (std::size_t i = 0; i < s; ++i) {
            const double d = x[i] - g.u[i];
            e += g.a[i] * g.a[i] * d * d;
        }
        return std::exp(-e);
    }
    case 5: {
        double e = 0.0;
        for (std::size_t i = 0; i < s; ++i)
            e += g.a[i] * std::abs(x[i] - g.u[i]);
        return std::exp(-e);
    }
    case 6: {
        if (x[0] > g.u[0] || (s >= 2 && x[1] > g.u[1]))
            return 0.0;
        double e = 0.0;
        for (std::size_t i = 0; i < s; ++i)
            e += g.a[i] * x[i];
        return std::exp(e);
    }
    default:
        throw std::invalid_argument("genz_eval: family must be 1..6");
    }
}

// Closed-form integrals over [0,1]^s. Alternating sums (family 3) run in
// long double to keep cancellation below the benchmark's noise floor.
inline double genz_exact(int family, std::span<const double> a,
                         std::span<const double> u) {
    const std::size_t s = a.size();
    if (s == 0 || u.size() != s)
        throw std::invalid_argument("genz_exact: a and u must be non-empty and equal-sized");
    for (const double ai : a)
        if (!(ai > 0.0))
            throw std::invalid_argument("genz_exact: parameters a must be positive");
    switch (family) {
    case 1: {
        // Re[e^{2*pi*i*u_1} prod (e^{i a_k} - 1)/(i a_k)]
        //   = prod (2 sin(a_k/2)/a_k) * cos(2*pi*u_1 + sum a_k / 2)
        double p = 1.0, half = 0.0;
        for (std::size_t i = 0; i < s; ++i) {
            p *= 2.0 * std::sin(a[i] / 2.0) / a[i];
            half += a[i] / 2.0;
        }
        return p * std::cos(2.0 * std::numbers::pi * u[0] + half);
    }
    case 2: {
        double p = 1.0;
        for (std::size_t i = 0; i < s; ++i)
            p *= a[i] * (std::atan(a[i] * (1.0 - u[i])) + std::atan(a[i] * u[i]));
        return p;
    }
    case 3: {
        if (s > 30)
            throw std::invalid_argument("genz_exact: family 3 needs s <= 30");
        long double sum = 0.0L;
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << s); ++v) {
            long double denom = 1.0L;
            for (std::size_t i = 0; i < s; ++i)
                if ((v >> i) & 1u)
                    denom += a[i];
            const int sign = std::popcount(v) % 2 == 0 ? 1 : -1;
            sum += sign / denom;
        }
        long double scale = 1.0L;
        for (std::size_t i = 1; i <= s; ++i)
            scale *= static_cast<long double>(i);
        for (std::size_t i = 0; i < s; ++i)
            scale *= static_cast<long double>(a[i]);
        return static_cast<double>(sum / scale);
    }
    case 4: {
        // prod (sqrt(pi)/(2 a_i)) (erf(a_i u_i) + erf(a_i (1-u_i)))
        double p = 1.0;
        const double rt_pi = std::sqrt(std::numbers::pi);
        for (std::size_t i = 0; i < s; ++i)
            p *= rt_pi / (2.0 * a[i]) *
                 (std::erf(a[i] * u[i]) + std::erf(a[i] * (1.0 - u[i])));
        return p;
    }
    case 5: {
        double p = 1.0;
        for (std::size_t i = 0; i < s; ++i)
            p *= (2.0 - std::exp(-a[i] * u[i]) - std::exp(-a[i] * (1.0 - u[i]))) / a[i];
        return p;
    }
    case 6: {
        // integrand vanishes for x_1 > u_1 or x_2 > u_2
        double p = 1.0;
        for (std::size_t i = 0; i < s; ++i) {
            const double upper = i < 2 ? u[i] : 1.0;
            p *= (std::exp(a[i] * upper) - 1.0) / a[i];
        }
        return p;
    }
    default:
        throw std::invalid_argument("genz_exact: family must be 1..6");
    }
}

// Draws `samples` paired instances for one family from substream
// (seed, family): per sample, s raw difficulties then s shifts, uniformly in
// [0,1); difficulties are rescaled so sum a_i = h. Degenerate draws (all-zero
// difficulty or an exactly zero integral) are redrawn with a note on stderr.
inline std::vector<GenzInstance> generate_instances(int family, int s, double h,
                                                    int samples, std::uint64_t seed) {
    if (family < 1 || family > 6)
        throw std::invalid_argument("generate_instances: family must be 1..6");
    if (s < 1 || samples < 1 || !(h > 0.0))
        throw std::invalid_argument("generate_instances: s >= 1, samples >= 1, h > 0 required");
    auto rng = SplitMix64::substream(seed, static_cast<std::uint64_t>(family));
    std::vector<GenzInstance> out;
    out.reserve(samples);
    for (int k = 0; k < samples; ++k) {
        GenzInstance g;
        g.family = family;
        for (;;) {
            g.a.resize(s);
            g.u.resize(s);
            double sum = 0.0;
            for (int i = 0; i < s; ++i) {
                g.a[i] = rng.next_double();
                sum += g.a[i];
            }
            for (int i = 0; i < s; ++i)
                g.u[i] = rng.next_double();
            if (sum == 0.0) {
                std::cerr << "genz: redrawing degenerate difficulty draw (family "
                          << family << ", sample " << k << ")\n";
                continue;
            }
            for (int i = 0; i < s; ++i)
                g.a[i] *= h / sum;
            g.exact = genz_exact(family, g.a, g.u);
            if (g.exact == 0.0) {
                std::cerr << "genz: redrawing instance with zero integral (family "
                          << family << ", sample " << k << ")\n";
                continue;
            }
            break;
        }
        out.push_back(std::move(g));
    }
    return out;
}

// FNV-1a over the parameter bits; lets callers assert that every net in a
// comparison saw the same instance list.
inline std::uint64_t instance_list_hash(std::span<const GenzInstance> list) {
    std::uint64_t hsh = 0xCBF29CE484222325ULL;
    auto mix = [&hsh](std::uint64_t v) {
        for (int byte = 0; byte < 8; ++byte) {
            hsh ^= (v >> (8 * byte)) & 0xFF;
            hsh *= 0x100000001B3ULL;
        }
    };
    for (const auto& g : list) {
        mix(static_cast<std::uint64_t>(g.family));
        for (const double v : g.a)
            mix(std::bit_cast<std::uint64_t>(v));
        for (const double v : g.u)
            mix(std::bit_cast<std::uint64_t>(v));
        mix(std::bit_cast<std::uint64_t>(g.exact));
    }
    return hsh;
}

struct NetFamily {
    std::string label;
    std::vector<DigitalNet> nets; // one per m value, matching run order
};

struct BenchResult {
    std::string net_label;
    int family = 0;
    int s = 0;
    int m = 0;
    std::uint64_t points = 0;
    double median_log10_rel_err = 0.0;
    int samples = 0;
    std::uint64_t seed = 0;
    std::uint64_t instance_hash = 0;
};

namespace detail {

inline double median_inplace(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

} // namespace detail

// Equal-weight QMC cubature of every instance over every net, reported as
// the median over instances of log10(|I - I_N| / |I|). All nets of one
// family/dimension cell integrate the identical instance list (paired
// comparison). Deterministic for fixed inputs, independent of `threads`;
// rows come back sorted by (net label, family, m).
inline std::vector<BenchResult> run_bench(std::span<const NetFamily> net_families,
                                          std::span<const int> families, int s,
                                          std::span<const int> m_values, int samples,
                                          std::uint64_t seed, int threads = 1) {
    if (net_families.empty() || families.empty() || m_values.empty())
        throw std::invalid_argument("run_bench: empty inputs");
    for (const int f : families)
        if (f < 1 || f > 6)
            throw std::invalid_argument("run_bench: family must be 1..6");
    for (const auto& nf : net_families) {
        if (nf.nets.size() != m_values.size())
            throw std::invalid_argument("run_bench: net family '" + nf.label +
                                        "' has " + std::to_string(nf.nets.size()) +
                                        " nets for " + std::to_string(m_values.size()) +
                                        " m values");
        for (std::size_t k = 0; k < nf.nets.size(); ++k) {
            const DigitalNet& net = nf.nets[k];
            if (net.s != s || net.m != m_values[k])
                throw std::invalid_argument("run_bench: net family '" + nf.label +
                                            "' does not match (s, m) grid");
            if (net.n > 64)
                throw std::invalid_argument("run_bench: n <= 64 required");
        }
    }

    std::vector<std::vector<GenzInstance>> inst(families.size());
    std::vector<std::uint64_t> inst_hash(families.size());
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        inst[fi] = generate_instances(families[fi], s, kGenzDefaultH[families[fi] - 1],
                                      samples, seed);
        inst_hash[fi] = instance_list_hash(inst[fi]);
    }

    struct Cell {
        std::size_t nf, mi, fi;
    };
    std::vector<Cell> cells;
    for (std::size_t nf = 0; nf < net_families.size(); ++nf)
        for (std::size_t fi = 0; fi < families.size(); ++fi)
            for (std::size_t mi = 0; mi < m_values.size(); ++mi)
                cells.push_back({nf, mi, fi});

    std::vector<BenchResult> results(cells.size());
    parallel_chunks(cells.size(), threads, [&](std::size_t ci) {
        const Cell& cell = cells[ci];
        const DigitalNet& net = net_families[cell.nf].nets[cell.mi];
        const std::uint64_t N = net.point_count();
        const PointWordEnumerator en(net);

        // one pass over the points per instance; the enumerator is cheap
        // next to the integrand
        std::vector<double> errs;
        errs.reserve(inst[cell.fi].size());
        std::vector<double> x(s);
        for (const GenzInstance& g : inst[cell.fi]) {
            PairwiseAccumulator<double> acc;
            en.run(0, N, [&](std::uint64_t, std::span<const std::uint64_t> y) {
                for (int i = 0; i < s; ++i)
                    x[i] = coordinate_value(y.subspan(i, 1), net.n);
                acc.add(genz_eval(g, x));
            });
            const double approx = acc.total() / static_cast<double>(N);
            errs.push_back(std::log10(std::abs(approx - g.exact) / std::abs(g.exact)));
        }

        BenchResult r;
        r.net_label = net_families[cell.nf].label;
        r.family = families[cell.fi];
        r.s = s;
        r.m = m_values[cell.mi];
        r.points = N;
        r.median_log10_rel_err = detail::median_inplace(errs);
        r.samples = samples;
        r.seed = seed;
        r.instance_hash = inst_hash[cell.fi];
        results[ci] = std::move(r);
    });
    std::sort(results.begin(), results.end(),
              [](const BenchResult& a, const BenchResult& b) {
                  return std::tie(a.net_label, a.family, a.m) <
                         std::tie(b.net_label, b.family, b.m);
              });
    return results;
}

// CSV rows exactly as consumed downstream; %.17g keeps medians round-trip
// safe.
inline void write_bench_csv(std::ostream& out, std::span<const BenchResult> results) {
    out << "net,family,s,m,N,median_log10_rel_err,samples,seed\n";
    char buf[64];
    for (const auto& r : results) {
        std::snprintf(buf, sizeof buf, "%.17g", r.median_log10_rel_err);
        out << r.net_label << ',' << r.family << ',' << r.s << ',' << r.m << ','
            << r.points << ',' << buf << ',' << r.samples << ',' << r.seed << '\n';
    }
}

} // namespace qmcnet
