#pragma once

// Reference counters and stream builders shared by the test files.

#include <cstdint>
#include <random>
#include <vector>

#include "spdclab/spdclab.hpp"

namespace testing_support {

using spdclab::Tick;

inline spdclab::EventStream stream_of(std::vector<Tick> ts, spdclab::Channel ch = spdclab::Channel::idler, Tick duration = 0) {
    spdclab::EventStream s{ch, std::move(ts), duration};
    if (s.duration == 0) s.duration = s.timestamps.empty() ? 1 : s.timestamps.back() + 1;
    return s;
}

/// Homogeneous Poisson stream, rate in Hz, duration in s.
inline spdclab::EventStream poisson_stream(double rate, double duration, std::uint64_t seed,
                                           spdclab::Channel ch = spdclab::Channel::idler) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(rate);
    std::vector<Tick> ts;
    double t = gap(rng);
    while (t < duration) {
        ts.push_back(spdclab::to_ticks(t));
        t += gap(rng);
    }
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return spdclab::EventStream{ch, std::move(ts), spdclab::to_ticks(duration)};
}

inline spdclab::EventStream prefix(const spdclab::EventStream& s, std::size_t n) {
    spdclab::EventStream out = s;
    if (out.timestamps.size() > n) out.timestamps.resize(n);
    return out;
}

inline bool in_window(std::int64_t d, std::int64_t tau, std::int64_t tauc, spdclab::WindowMode mode) {
    if (mode == spdclab::WindowMode::centered) return d - tau >= -tauc && d - tau <= tauc;
    return d - tau >= 0 && d - tau < 2 * tauc;
}

inline std::vector<std::int64_t> tick_delays(const spdclab::UniformGrid& g) {
    const auto tg = spdclab::detail::to_tick_grid(g);
    std::vector<std::int64_t> out(g.size);
    for (std::size_t k = 0; k < g.size; ++k) out[k] = tg.first + static_cast<std::int64_t>(k) * tg.step;
    return out;
}

/// All-pairs reference for pair_histogram.
inline std::vector<std::uint64_t> brute_pairs(const spdclab::EventStream& a, const spdclab::EventStream& b,
                                              const spdclab::UniformGrid& grid, double tauc,
                                              spdclab::WindowMode mode = spdclab::WindowMode::centered) {
    const auto taus = tick_delays(grid);
    const std::int64_t w = spdclab::detail::tauc_ticks(tauc);
    std::vector<std::uint64_t> out(grid.size, 0);
    for (Tick ta : a.timestamps) {
        for (Tick tb : b.timestamps) {
            const std::int64_t d = static_cast<std::int64_t>(ta) - static_cast<std::int64_t>(tb);
            if (d < taus.front() - 2 * w || d > taus.back() + 2 * w) continue;
            for (std::size_t k = 0; k < taus.size(); ++k) {
                if (in_window(d, taus[k], w, mode)) ++out[k];
            }
        }
    }
    return out;
}

/// Reference for triple_histogram: every idler event against every s1 and s2 event.
inline std::vector<std::uint64_t> brute_triples(const spdclab::EventStream& idler, const spdclab::EventStream& s1,
                                                const spdclab::EventStream& s2, const spdclab::UniformGrid& grid,
                                                double tauc, spdclab::WindowMode mode = spdclab::WindowMode::centered) {
    const auto taus = tick_delays(grid);
    const std::int64_t w = spdclab::detail::tauc_ticks(tauc);
    std::vector<std::uint64_t> out(grid.size, 0);
    std::vector<std::int64_t> d2;
    for (Tick ti : idler.timestamps) {
        const auto i = static_cast<std::int64_t>(ti);
        std::uint64_t n1 = 0;
        for (Tick t1 : s1.timestamps) {
            if (in_window(static_cast<std::int64_t>(t1) - i, 0, w, mode)) ++n1;
        }
        if (n1 == 0) continue;
        d2.clear();
        for (Tick t2 : s2.timestamps) {
            const std::int64_t d = static_cast<std::int64_t>(t2) - i;
            if (d >= taus.front() - 2 * w && d <= taus.back() + 2 * w) d2.push_back(d);
        }
        for (std::size_t k = 0; k < taus.size(); ++k) {
            for (std::int64_t d : d2) {
                if (in_window(d, taus[k], w, mode)) out[k] += n1;
            }
        }
    }
    return out;
}

} // namespace testing_support
