#pragma once

// Two- and three-fold coincidence counting on sorted femtosecond timestamp
// streams, and the normalized estimators built from the counts.
//
// Coincidence rule (centered mode): |t_a - t_b - tau| <= tauc in integer
// ticks, i.e. a full window of 2*tauc with ties counted inside. Every partner
// inside the window counts, not only the first.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "spdclab/errors.hpp"
#include "spdclab/event_sim.hpp"
#include "spdclab/grid.hpp"
#include "spdclab/parallel.hpp"

namespace spdclab {

enum class WindowMode {
    centered,  // |d - tau| <= tauc
    one_sided, // 0 <= d - tau < 2 tauc
};

struct CountOptions {
    WindowMode mode = WindowMode::centered;
    std::size_t shards = 1; // time shards counted independently and summed
};

/// Raw coincidence counts per delay.
struct Histogram {
    UniformGrid delays;                // bin centers, s
    std::vector<std::uint64_t> counts;
    double observation_time = 0.0;     // s
    double tauc = 0.0;                 // coincidence half-width, s

    std::size_t size() const { return counts.size(); }
    double rate(std::size_t i) const { return static_cast<double>(counts[i]) / observation_time; }
};

/// Rate with its Poisson standard error.
struct Rate {
    double value = 0.0;
    double error = 0.0;
    std::uint64_t count = 0;
    double duration = 0.0;

    double relative_error_sq() const { return count > 0 ? 1.0 / static_cast<double>(count) : 1.0; }
};

struct EstimatorCurve {
    UniformGrid delays;
    std::vector<double> values;
    std::vector<double> stderrs;
    std::vector<char> valid; // 0 where a denominator vanished

    std::size_t size() const { return values.size(); }
};

inline Rate singles_rate(const EventStream& stream) {
    if (stream.duration == 0) throw invalid_parameter("singles rate needs a positive duration");
    Rate r;
    r.count = stream.size();
    r.duration = to_seconds(stream.duration);
    r.value = static_cast<double>(r.count) / r.duration;
    r.error = std::sqrt(static_cast<double>(r.count)) / r.duration;
    return r;
}

namespace detail {

struct TickGrid {
    std::int64_t first = 0;
    std::int64_t step = 1;
    std::int64_t size = 0;
};

inline TickGrid to_tick_grid(const UniformGrid& g) {
    if (g.size == 0) throw invalid_parameter("delay grid is empty");
    TickGrid t;
    t.first = std::llround(g.origin / tick_seconds);
    t.step = std::llround(g.step / tick_seconds);
    t.size = static_cast<std::int64_t>(g.size);
    if (t.step <= 0) throw invalid_parameter("delay grid step must be at least one tick");
    return t;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}
inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

// Range of delays d for which some bin is hit, and the bins hit by one d.
struct WindowRule {
    TickGrid grid;
    std::int64_t tauc = 0;
    WindowMode mode = WindowMode::centered;

    std::int64_t min_offset() const {
        return mode == WindowMode::centered ? grid.first - tauc : grid.first;
    }
    std::int64_t max_offset() const {
        const std::int64_t last = grid.first + (grid.size - 1) * grid.step;
        return mode == WindowMode::centered ? last + tauc : last + 2 * tauc - 1;
    }
    // Inclusive bin range [lo, hi] (possibly empty) for delay d.
    void bins(std::int64_t d, std::int64_t& lo, std::int64_t& hi) const {
        if (mode == WindowMode::centered) {
            lo = ceil_div(d - tauc - grid.first, grid.step);
            hi = floor_div(d + tauc - grid.first, grid.step);
        } else {
            lo = floor_div(d - 2 * tauc - grid.first, grid.step) + 1;
            hi = floor_div(d - grid.first, grid.step);
        }
        lo = std::max<std::int64_t>(lo, 0);
        hi = std::min<std::int64_t>(hi, grid.size - 1);
    }
};

inline void add_range(std::vector<std::int64_t>& diff, std::int64_t lo, std::int64_t hi, std::int64_t w) {
    if (lo > hi) return;
    diff[static_cast<std::size_t>(lo)] += w;
    diff[static_cast<std::size_t>(hi) + 1] -= w;
}

// Pairs (a, b) with b in `ref`; `a` must cover every partner of `ref`.
inline void count_pairs(std::span<const Tick> a, std::span<const Tick> ref, const WindowRule& rule,
                        std::vector<std::int64_t>& diff) {
    const std::int64_t dmin = rule.min_offset(), dmax = rule.max_offset();
    std::size_t start = 0;
    for (const Tick tb : ref) {
        const auto b = static_cast<std::int64_t>(tb);
        while (start < a.size() && static_cast<std::int64_t>(a[start]) - b < dmin) ++start;
        for (std::size_t k = start; k < a.size(); ++k) {
            const std::int64_t d = static_cast<std::int64_t>(a[k]) - b;
            if (d > dmax) break;
            std::int64_t lo, hi;
            rule.bins(d, lo, hi);
            add_range(diff, lo, hi, 1);
        }
    }
}

// Triples (i, s1, s2): s1 - i inside the zero-delay window, s2 - i inside the tau window.
inline void count_triples(std::span<const Tick> ref, std::span<const Tick> s1, std::span<const Tick> s2,
                          const WindowRule& rule, std::vector<std::int64_t>& diff) {
    const std::int64_t dmin = rule.min_offset(), dmax = rule.max_offset();
    const std::int64_t zmin = rule.mode == WindowMode::centered ? -rule.tauc : 0;
    const std::int64_t zmax = rule.mode == WindowMode::centered ? rule.tauc : 2 * rule.tauc - 1;
    std::size_t p1 = 0, p2 = 0;
    for (const Tick ti : ref) {
        const auto i = static_cast<std::int64_t>(ti);
        while (p1 < s1.size() && static_cast<std::int64_t>(s1[p1]) - i < zmin) ++p1;
        std::int64_t n1 = 0;
        for (std::size_t k = p1; k < s1.size() && static_cast<std::int64_t>(s1[k]) - i <= zmax; ++k) ++n1;
        while (p2 < s2.size() && static_cast<std::int64_t>(s2[p2]) - i < dmin) ++p2;
        if (n1 == 0) continue;
        for (std::size_t k = p2; k < s2.size(); ++k) {
            const std::int64_t d = static_cast<std::int64_t>(s2[k]) - i;
            if (d > dmax) break;
            std::int64_t lo, hi;
            rule.bins(d, lo, hi);
            add_range(diff, lo, hi, n1);
        }
    }
}

inline std::span<const Tick> window_of(const std::vector<Tick>& v, std::int64_t lo, std::int64_t hi_exclusive) {
    auto clamp = [](std::int64_t t) { return static_cast<Tick>(std::max<std::int64_t>(t, 0)); };
    auto b = lo <= 0 ? v.begin() : std::lower_bound(v.begin(), v.end(), clamp(lo));
    auto e = hi_exclusive <= 0 ? v.begin() : std::lower_bound(v.begin(), v.end(), clamp(hi_exclusive));
    if (e < b) e = b;
    return {v.data() + (b - v.begin()), static_cast<std::size_t>(e - b)};
}

// Shard k owns reference events in [edges[k], edges[k+1]); partner streams are
// cut with the window overlap, so each coincidence is counted exactly once.
template <class CountFn>
std::vector<std::int64_t> sharded_count(const std::vector<Tick>& ref, std::size_t shards, std::int64_t size, CountFn&& fn) {
    shards = std::max<std::size_t>(1, shards);
    const Tick end_time = ref.empty() ? 1 : ref.back() + 1;
    std::vector<std::vector<std::int64_t>> partial(shards, std::vector<std::int64_t>(static_cast<std::size_t>(size) + 1, 0));
    parallel_for(shards, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const auto lo = static_cast<std::int64_t>(static_cast<long double>(end_time) * k / shards);
            const auto hi = static_cast<std::int64_t>(static_cast<long double>(end_time) * (k + 1) / shards);
            fn(lo, hi, window_of(ref, lo, hi), partial[k]);
        }
    });
    std::vector<std::int64_t> diff(static_cast<std::size_t>(size) + 1, 0);
    for (const auto& p : partial) {
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] += p[i];
    }
    return diff;
}

inline std::vector<std::uint64_t> prefix_counts(const std::vector<std::int64_t>& diff, std::size_t n) {
    std::vector<std::uint64_t> out(n);
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += diff[i];
        out[i] = static_cast<std::uint64_t>(acc);
    }
    return out;
}

inline std::int64_t tauc_ticks(double tauc) {
    if (!(tauc > 0.0)) throw invalid_parameter("coincidence half-width must be positive");
    return std::llround(tauc / tick_seconds);
}

} // namespace detail

/// Counts (t_a, t_b) with t_a - t_b inside the window around each grid delay.
inline Histogram pair_histogram(const EventStream& a, const EventStream& b, const UniformGrid& tau_grid, double tauc,
                                const CountOptions& options = {}) {
    a.require_sorted();
    b.require_sorted();
    const detail::WindowRule rule{detail::to_tick_grid(tau_grid), detail::tauc_ticks(tauc), options.mode};
    const auto diff = detail::sharded_count(
        b.timestamps, options.shards, rule.grid.size,
        [&](std::int64_t lo, std::int64_t hi, std::span<const Tick> ref, std::vector<std::int64_t>& out) {
            const auto partners = detail::window_of(a.timestamps, lo + rule.min_offset(), hi + rule.max_offset() + 1);
            detail::count_pairs(partners, ref, rule, out);
        });
    Histogram h;
    h.delays = tau_grid;
    h.counts = detail::prefix_counts(diff, tau_grid.size);
    h.observation_time = to_seconds(std::max(a.duration, b.duration));
    h.tauc = tauc;
    return h;
}

/// Counts (i, s1, s2) with s1 coincident with i and s2 coincident with i + tau.
inline Histogram triple_histogram(const EventStream& idler, const EventStream& s1, const EventStream& s2,
                                  const UniformGrid& tau_grid, double tauc, const CountOptions& options = {}) {
    idler.require_sorted();
    s1.require_sorted();
    s2.require_sorted();
    const detail::WindowRule rule{detail::to_tick_grid(tau_grid), detail::tauc_ticks(tauc), options.mode};
    const std::int64_t zmin = options.mode == WindowMode::centered ? -rule.tauc : 0;
    const std::int64_t zmax = options.mode == WindowMode::centered ? rule.tauc : 2 * rule.tauc - 1;
    const auto diff = detail::sharded_count(
        idler.timestamps, options.shards, rule.grid.size,
        [&](std::int64_t lo, std::int64_t hi, std::span<const Tick> ref, std::vector<std::int64_t>& out) {
            const auto p1 = detail::window_of(s1.timestamps, lo + zmin, hi + zmax + 1);
            const auto p2 = detail::window_of(s2.timestamps, lo + rule.min_offset(), hi + rule.max_offset() + 1);
            detail::count_triples(ref, p1, p2, rule, out);
        });
    Histogram h;
    h.delays = tau_grid;
    h.counts = detail::prefix_counts(diff, tau_grid.size);
    h.observation_time = to_seconds(std::max({idler.duration, s1.duration, s2.duration}));
    h.tauc = tauc;
    return h;
}

/// Coincidence rate of (a, b) at a single delay.
inline Rate coincidence_rate(const EventStream& a, const EventStream& b, double tau, double tauc,
                             const CountOptions& options = {}) {
    const auto h = pair_histogram(a, b, UniformGrid{tau, 1e-12, 1}, tauc, options);
    Rate r;
    r.count = h.counts[0];
    r.duration = h.observation_time;
    r.value = h.rate(0);
    r.error = std::sqrt(static_cast<double>(r.count)) / r.duration;
    return r;
}

/// Normalized signal-idler coincidences, rate(tau) / (r_a r_b 2 tauc).
inline EstimatorCurve estimate_g2bar_si(const Histogram& pairs, const Rate& a_rate, const Rate& b_rate) {
    if (!(a_rate.value > 0.0) || !(b_rate.value > 0.0)) throw invalid_parameter("singles rates must be positive");
    const double norm = a_rate.value * b_rate.value * 2.0 * pairs.tauc;
    const double singles_var = a_rate.relative_error_sq() + b_rate.relative_error_sq();
    EstimatorCurve out{pairs.delays, std::vector<double>(pairs.size()), std::vector<double>(pairs.size()),
                       std::vector<char>(pairs.size(), 1)};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double n = static_cast<double>(pairs.counts[i]);
        out.values[i] = pairs.rate(i) / norm;
        const double rel_sq = 1.0 / std::max(n, 1.0) + singles_var;
        const double scale = n > 0.0 ? out.values[i] : 1.0 / (pairs.observation_time * norm);
        out.stderrs[i] = scale * std::sqrt(rel_sq);
    }
    return out;
}

/// Time-averaged conditioned coherence, N_ssi(tau) r_i / (N_si(0) N_si(tau)), with the
/// measured idler singles rate standing in for R.
inline EstimatorCurve estimate_gbar2_c(const Histogram& triples, const Rate& pairs0, const Histogram& pairs,
                                       const Rate& idler_rate) {
    if (triples.size() != pairs.size()) throw grid_mismatch("triple and pair histograms differ in length");
    EstimatorCurve out{triples.delays, std::vector<double>(triples.size()), std::vector<double>(triples.size()),
                       std::vector<char>(triples.size(), 1)};
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const double n3 = static_cast<double>(triples.counts[i]);
        const double n2 = static_cast<double>(pairs.counts[i]);
        if (pairs0.count == 0 || pairs.counts[i] == 0 || idler_rate.count == 0) {
            out.values[i] = std::numeric_limits<double>::quiet_NaN();
            out.stderrs[i] = std::numeric_limits<double>::quiet_NaN();
            out.valid[i] = 0;
            continue;
        }
        out.values[i] = triples.rate(i) * idler_rate.value / (pairs0.value * pairs.rate(i));
        const double rel_sq = 1.0 / std::max(n3, 1.0) + 1.0 / n2 + pairs0.relative_error_sq() + idler_rate.relative_error_sq();
        const double scale = n3 > 0.0 ? out.values[i] : idler_rate.value / (triples.observation_time * pairs0.value * pairs.rate(i));
        out.stderrs[i] = scale * std::sqrt(rel_sq);
    }
    return out;
}

/// Mean of the valid points whose |delay| lies in [lo, hi], with a conservative
/// error: the mean of the per-point errors (neighbouring bins share counts).
struct RegionSummary {
    double mean = 0.0;
    double error = 0.0;
    std::size_t points = 0;
};

inline RegionSummary summarize(const EstimatorCurve& c, double abs_lo, double abs_hi) {
    RegionSummary s;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double t = std::abs(c.delays[i]);
        if (!c.valid[i] || t < abs_lo || t > abs_hi) continue;
        s.mean += c.values[i];
        s.error += c.stderrs[i];
        ++s.points;
    }
    if (s.points > 0) {
        s.mean /= static_cast<double>(s.points);
        s.error /= static_cast<double>(s.points);
    }
    return s;
}

/// Per-point z-scores between two estimator curves on the same grid.
inline std::vector<double> z_scores(const EstimatorCurve& a, const EstimatorCurve& b) {
    if (a.size() != b.size()) throw grid_mismatch("curves differ in length");
    std::vector<double> z(a.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a.valid[i] || !b.valid[i]) continue;
        const double s = std::hypot(a.stderrs[i], b.stderrs[i]);
        if (s > 0.0) z[i] = (a.values[i] - b.values[i]) / s;
    }
    return z;
}

} // namespace spdclab
