#pragma once

// Synthetic detection events. The source is a coherence-cell point process:
// the time axis is cut into cells of length dt, each cell holds n pairs
// (Bose-Einstein for the thermal model, Poisson for the null model), each
// pair gets one uniform time inside its cell, and signal time == idler time.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spdclab/errors.hpp"
#include "spdclab/parallel.hpp"
#include "spdclab/random.hpp"
#include "spdclab/spdc_model.hpp"

namespace spdclab {

/// Femtosecond ticks.
using Tick = std::uint64_t;
inline constexpr double tick_seconds = 1e-15;

inline Tick to_ticks(double seconds) {
    if (!(seconds >= 0.0) || !(seconds < 1.8e4)) {
        throw invalid_parameter("time value out of range for femtosecond ticks");
    }
    return static_cast<Tick>(std::llround(seconds / tick_seconds));
}
inline double to_seconds(Tick t) { return static_cast<double>(t) * tick_seconds; }
inline double to_seconds(std::int64_t t) { return static_cast<double>(t) * tick_seconds; }

enum class SourceModel { thermal, poisson };

constexpr std::string_view model_name(SourceModel m) { return m == SourceModel::thermal ? "thermal" : "poisson"; }

inline SourceModel parse_model(std::string_view s) {
    if (s == "thermal") return SourceModel::thermal;
    if (s == "poisson") return SourceModel::poisson;
    throw invalid_parameter("unknown source model '" + std::string(s) + "' (expected thermal|poisson)");
}

/// Emission times of pairs (signal time == idler time), sorted.
struct PairList {
    std::vector<Tick> times;
    Tick cell_ticks = 1;
    Tick duration = 0;
    std::uint64_t cell_count = 0;

    std::size_t size() const { return times.size(); }
    std::uint64_t cell_of(std::size_t i) const { return times[i] / cell_ticks; }
};

enum class Channel : std::uint8_t { idler = 0, signal1 = 1, signal2 = 2 };

constexpr std::string_view channel_name(Channel c) {
    switch (c) {
    case Channel::idler: return "idler";
    case Channel::signal1: return "signal1";
    case Channel::signal2: return "signal2";
    }
    return "?";
}

struct EventStream {
    Channel channel = Channel::idler;
    std::vector<Tick> timestamps; // strictly ascending
    Tick duration = 0;

    std::size_t size() const { return timestamps.size(); }
    bool empty() const { return timestamps.empty(); }

    bool is_sorted() const { return std::is_sorted(timestamps.begin(), timestamps.end()); }

    void require_sorted() const {
        if (!is_sorted()) {
            throw unsorted_input("event stream '" + std::string(channel_name(channel)) + "' is not sorted ascending");
        }
    }
};

struct DetectorChain {
    double idler_efficiency = 1.0;
    double signal_efficiency = 1.0;
    double splitter_ratio = 0.5; // probability a kept signal photon goes to signal1
    double jitter_width = 0.0;   // full width of the uniform timing error, s

    void validate() const {
        auto prob = [](double v, const char* name) {
            if (!(v >= 0.0 && v <= 1.0)) throw invalid_parameter(std::string(name) + " must lie in [0, 1]");
        };
        prob(idler_efficiency, "idler_efficiency");
        prob(signal_efficiency, "signal_efficiency");
        prob(splitter_ratio, "splitter_ratio");
        if (!(jitter_width >= 0.0) || !std::isfinite(jitter_width)) throw invalid_parameter("jitter_width must be >= 0");
    }
};

struct DetectedStreams {
    EventStream idler{Channel::idler, {}, 0};
    EventStream signal1{Channel::signal1, {}, 0};
    EventStream signal2{Channel::signal2, {}, 0};
};

namespace detail {

inline constexpr std::uint64_t cells_per_chunk = std::uint64_t{1} << 22;

struct CellLayout {
    Tick cell_ticks = 1;
    Tick duration = 0;
    std::uint64_t cells = 0;
    double mu = 0.0;
};

inline CellLayout layout_cells(const SourceParams& params, double duration_s) {
    params.validate();
    if (!(duration_s >= 0.0)) throw invalid_parameter("duration must be >= 0");
    CellLayout l;
    l.cell_ticks = std::max<Tick>(1, to_ticks(params.coherence_time));
    l.duration = to_ticks(duration_s);
    l.cells = (l.duration + l.cell_ticks - 1) / l.cell_ticks;
    // Occupancy of the realized (tick-rounded) cell keeps the pair rate exact.
    l.mu = params.pair_rate * to_seconds(l.cell_ticks);
    return l;
}

// Skip-sampling over empty cells: draws the gap to the next occupied cell and
// that cell's (>= 1) pair count.
template <class SkipFn, class CountFn>
PairList generate_cells(const CellLayout& l, std::uint64_t seed, SkipFn&& skip, CountFn&& count) {
    PairList out;
    out.cell_ticks = l.cell_ticks;
    out.duration = l.duration;
    out.cell_count = l.cells;
    if (l.cells == 0) return out;

    const std::uint64_t chunks = (l.cells + cells_per_chunk - 1) / cells_per_chunk;
    std::vector<std::vector<Tick>> parts(chunks);
    parallel_for(chunks, [&](std::size_t begin, std::size_t end) {
        std::vector<Tick> offsets;
        for (std::size_t c = begin; c < end; ++c) {
            Substream rng(seed, Purpose::cells, c);
            const std::uint64_t first = c * cells_per_chunk;
            const std::uint64_t last = std::min(l.cells, first + cells_per_chunk);
            auto& dst = parts[c];
            dst.reserve(static_cast<std::size_t>(static_cast<double>(last - first) * l.mu * 1.1) + 16);
            std::uint64_t cell = first;
            while (true) {
                const double gap = skip(rng);
                if (gap >= static_cast<double>(last - cell)) break;
                cell += static_cast<std::uint64_t>(gap);
                const std::uint64_t n = count(rng);
                offsets.clear();
                for (std::uint64_t k = 0; k < n; ++k) {
                    offsets.push_back(static_cast<Tick>(rng.uniform() * static_cast<double>(l.cell_ticks)));
                }
                std::sort(offsets.begin(), offsets.end());
                const Tick base = cell * l.cell_ticks;
                for (Tick o : offsets) {
                    if (base + o <= l.duration) dst.push_back(base + o);
                }
                ++cell;
            }
        }
    });

    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    out.times.reserve(total);
    for (auto& p : parts) {
        out.times.insert(out.times.end(), p.begin(), p.end());
        std::vector<Tick>().swap(p);
    }
    return out;
}

} // namespace detail

/// Thermal (Bose-Einstein) cells: P(n) = mu^n / (1 + mu)^(n+1).
inline PairList gen_thermal_cells(const SourceParams& params, double duration_s, std::uint64_t seed) {
    const auto l = detail::layout_cells(params, duration_s);
    if (l.mu >= 1.0) throw regime_violation("thermal cell model requires mean pairs per cell < 1");
    const double log_empty = std::log1p(l.mu);               // -ln P(n = 0)
    const double log_ratio = std::log(l.mu / (1.0 + l.mu));  // ln of the geometric ratio
    return detail::generate_cells(
        l, seed, [&](Substream& rng) { return std::floor(-std::log(rng.uniform_open()) / log_empty); },
        [&](Substream& rng) {
            // Memoryless: n - 1 given n >= 1 is again Bose-Einstein.
            return std::uint64_t{1} + static_cast<std::uint64_t>(std::floor(std::log(rng.uniform_open()) / log_ratio));
        });
}

/// Poisson cells with the same construction: pairs form a homogeneous Poisson process.
inline PairList gen_poisson_pairs(const SourceParams& params, double duration_s, std::uint64_t seed) {
    const auto l = detail::layout_cells(params, duration_s);
    const double mu = l.mu;
    const double first = mu / std::expm1(mu); // P(n = 1 | n >= 1)
    return detail::generate_cells(
        l, seed, [&](Substream& rng) { return std::floor(-std::log(rng.uniform_open()) / mu); },
        [&](Substream& rng) {
            double u = rng.uniform();
            double p = first;
            std::uint64_t k = 1;
            while (u >= p && k < 1000) {
                u -= p;
                ++k;
                p *= mu / static_cast<double>(k);
            }
            return k;
        });
}

inline PairList generate_pairs(SourceModel model, const SourceParams& params, double duration_s, std::uint64_t seed) {
    return model == SourceModel::thermal ? gen_thermal_cells(params, duration_s, seed)
                                         : gen_poisson_pairs(params, duration_s, seed);
}

/// Histogram of pairs per cell: element n counts cells holding n pairs.
inline std::vector<std::uint64_t> cell_occupancy(const PairList& pairs) {
    std::vector<std::uint64_t> hist(1, 0);
    std::uint64_t occupied = 0;
    std::size_t i = 0;
    while (i < pairs.size()) {
        const std::uint64_t cell = pairs.cell_of(i);
        std::size_t j = i;
        while (j < pairs.size() && pairs.cell_of(j) == cell) ++j;
        const std::size_t n = j - i;
        if (hist.size() <= n) hist.resize(n + 1, 0);
        ++hist[n];
        ++occupied;
        i = j;
    }
    hist[0] = pairs.cell_count - occupied;
    return hist;
}

namespace detail {

inline Tick displace(Tick t, double u, double width_ticks, Tick duration) {
    if (width_ticks <= 0.0) return t;
    const auto off = static_cast<std::int64_t>(std::llround((u - 0.5) * width_ticks));
    const auto shifted = static_cast<std::int64_t>(t) + off;
    if (shifted < 0) return 0;
    if (static_cast<Tick>(shifted) > duration) return duration;
    return static_cast<Tick>(shifted);
}

inline void finish(EventStream& s) {
    std::sort(s.timestamps.begin(), s.timestamps.end());
    s.timestamps.erase(std::unique(s.timestamps.begin(), s.timestamps.end()), s.timestamps.end());
}

} // namespace detail

/// Thinning, 50/50-style routing and per-detector uniform jitter.
inline DetectedStreams apply_detector_chain(const PairList& pairs, const DetectorChain& chain, std::uint64_t seed) {
    chain.validate();
    if (!std::is_sorted(pairs.times.begin(), pairs.times.end())) throw unsorted_input("pair list is not sorted");
    DetectedStreams out;
    out.idler.duration = out.signal1.duration = out.signal2.duration = pairs.duration;
    const double width = chain.jitter_width / tick_seconds;

    const auto expected = static_cast<std::size_t>(static_cast<double>(pairs.size()) * 0.55) + 16;
    out.idler.timestamps.reserve(static_cast<std::size_t>(static_cast<double>(pairs.size()) * chain.idler_efficiency) + 16);
    out.signal1.timestamps.reserve(expected);
    out.signal2.timestamps.reserve(expected);

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const Tick t = pairs.times[i];
        if (counter_uniform(seed, Purpose::idler_keep, i) < chain.idler_efficiency) {
            const double u = counter_uniform(seed, Purpose::jitter_idler, i);
            out.idler.timestamps.push_back(detail::displace(t, u, width, pairs.duration));
        }
        if (counter_uniform(seed, Purpose::signal_keep, i) < chain.signal_efficiency) {
            if (counter_uniform(seed, Purpose::route, i) < chain.splitter_ratio) {
                const double u = counter_uniform(seed, Purpose::jitter_signal1, i);
                out.signal1.timestamps.push_back(detail::displace(t, u, width, pairs.duration));
            } else {
                const double u = counter_uniform(seed, Purpose::jitter_signal2, i);
                out.signal2.timestamps.push_back(detail::displace(t, u, width, pairs.duration));
            }
        }
    }
    detail::finish(out.idler);
    detail::finish(out.signal1);
    detail::finish(out.signal2);
    return out;
}

/// Union of two streams of one arm, sorted and deduplicated.
inline EventStream merge_streams(const EventStream& a, const EventStream& b, Channel channel) {
    EventStream out{channel, {}, std::max(a.duration, b.duration)};
    out.timestamps.resize(a.size() + b.size());
    std::merge(a.timestamps.begin(), a.timestamps.end(), b.timestamps.begin(), b.timestamps.end(), out.timestamps.begin());
    out.timestamps.erase(std::unique(out.timestamps.begin(), out.timestamps.end()), out.timestamps.end());
    return out;
}

} // namespace spdclab
