#pragma once

// Scenario stages shared by the CLI and the integration tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include "spdclab/correlator.hpp"
#include "spdclab/event_sim.hpp"
#include "spdclab/scenario.hpp"
#include "spdclab/smearing.hpp"
#include "spdclab/spdc_model.hpp"

namespace spdclab {

struct AnalyticProducts {
    CorrelationCurve auto_rate;  // R(tau)
    CorrelationCurve cross;      // C(tau)
    CorrelationCurve g2si;
    CorrelationCurve g2ss;
    CorrelationCurve pssi_diag;
    CorrelationCurve g2c;        // t1 = ti, t2 = ti + tau
    CorrelationCurve gbar2si;    // smeared, on the kernel grid
    CorrelationCurve gbar2c;     // smeared, on the kernel grid
};

/// Point samples on a coherence-time scale grid plus the smeared curves.
inline AnalyticProducts run_analytic(const Scenario& s) {
    s.validate();
    const CorrelationPair rc(s.source);
    const UniformGrid fine = UniformGrid::covering(3.0 * s.source.coherence_time, s.source.coherence_time / 50.0);
    auto sample = [&](Unit unit, auto&& f) {
        CorrelationCurve c{fine, std::vector<double>(fine.size), unit};
        for (std::size_t i = 0; i < fine.size; ++i) c.values[i] = f(fine[i]);
        return c;
    };
    AnalyticProducts out;
    out.auto_rate = sample(Unit::hz, [&](double t) { return rc.auto_rate(t); });
    out.cross = sample(Unit::amplitude, [&](double t) { return rc.cross(t); });
    out.g2si = sample(Unit::dimensionless, [&](double t) { return g2_si(rc, t); });
    out.g2ss = sample(Unit::dimensionless, [&](double t) { return g2_ss_unconditional(rc, t); });
    out.pssi_diag = sample(Unit::hz3, [&](double t) { return p_ssi_diag(rc, t); });
    out.g2c = sample(Unit::dimensionless, [&](double t) { return g2_c(rc, 0.0, t, 0.0); });

    const ResponseKernel kernel(s.window.tauc, s.chain.jitter_width, s.smearing_step());
    const UniformGrid grid = UniformGrid::covering(s.window.span, kernel.step());
    out.gbar2si = gbar2_si_analytic(rc, kernel, grid);
    out.gbar2c = gbar2c_analytic(rc, kernel, grid);
    return out;
}

struct SmearProducts {
    ResponseKernel kernel;
    PlateauPrediction plateaus;
    CorrelationCurve kernel_curve;
    CorrelationCurve gbar2si;
    CorrelationCurve gbar2c;
    CorrelationSurface nssi; // smeared P_ssi over (t1 - ti, t2 - ti)
};

inline SmearProducts run_smear(const Scenario& s, bool with_surface = true) {
    s.validate();
    const CorrelationPair rc(s.source);
    ResponseKernel kernel(s.window.tauc, s.chain.jitter_width, s.smearing_step());
    const UniformGrid grid = UniformGrid::covering(s.window.span, kernel.step());
    CorrelationCurve kc{UniformGrid::centered(kernel.step(), kernel.half_count()), kernel.samples(), Unit::per_second};
    SmearProducts out{kernel, predict_plateaus(s.source, kernel), kc, gbar2_si_analytic(rc, kernel, grid),
                      gbar2c_analytic(rc, kernel, grid), {}};
    if (with_surface) out.nssi = smear_surface(sample_p_ssi_surface(rc, grid, grid), kernel);
    return out;
}

inline DetectedStreams run_simulation(const Scenario& s) {
    s.validate();
    const PairList pairs = generate_pairs(s.model, s.source, s.duration, s.seed);
    return apply_detector_chain(pairs, s.chain, s.seed);
}

struct CountProducts {
    Rate idler, signal1, signal2, signal;
    Histogram si;      // merged signal arm vs idler
    Histogram si1;     // signal1 vs idler
    Histogram si2;     // signal2 vs idler
    Histogram ss;      // signal1 vs signal2
    Histogram triples; // (idler, signal1 at 0, signal2 at tau)
    Rate pairs0;       // signal1-idler coincidence rate at zero delay
    EstimatorCurve g2bar_si;
    EstimatorCurve g2bar_ss;
    EstimatorCurve gbar2c;
    RegionSummary si_short, si_long, c_short, c_long;
};

inline CountProducts run_count(const Scenario& s, const DetectedStreams& streams, std::size_t shards = 1) {
    s.validate();
    const CountOptions opt{s.window.mode, shards};
    const UniformGrid grid = s.window.delay_grid();
    const double tauc = s.window.tauc;
    CountProducts out;
    out.idler = singles_rate(streams.idler);
    out.signal1 = singles_rate(streams.signal1);
    out.signal2 = singles_rate(streams.signal2);
    const EventStream signal = merge_streams(streams.signal1, streams.signal2, Channel::signal1);
    out.signal = singles_rate(signal);

    out.si = pair_histogram(signal, streams.idler, grid, tauc, opt);
    out.si1 = pair_histogram(streams.signal1, streams.idler, grid, tauc, opt);
    out.si2 = pair_histogram(streams.signal2, streams.idler, grid, tauc, opt);
    out.ss = pair_histogram(streams.signal2, streams.signal1, grid, tauc, opt);
    out.triples = triple_histogram(streams.idler, streams.signal1, streams.signal2, grid, tauc, opt);
    out.pairs0 = coincidence_rate(streams.signal1, streams.idler, 0.0, tauc, opt);

    if (out.signal.value > 0.0 && out.idler.value > 0.0) out.g2bar_si = estimate_g2bar_si(out.si, out.signal, out.idler);
    if (out.signal1.value > 0.0 && out.signal2.value > 0.0) out.g2bar_ss = estimate_g2bar_si(out.ss, out.signal2, out.signal1);
    out.gbar2c = estimate_gbar2_c(out.triples, out.pairs0, out.si2, out.idler);

    const double inner = std::max(0.0, tauc - s.chain.jitter_width);
    // Long region starts a quarter bin past tauc + jitter so the transition bin is excluded.
    const double outer = tauc + s.chain.jitter_width + 0.25 * s.window.bin;
    if (!out.g2bar_si.values.empty()) {
        out.si_short = summarize(out.g2bar_si, 0.0, inner);
        out.si_long = summarize(out.g2bar_si, outer, INFINITY);
    }
    out.c_short = summarize(out.gbar2c, 0.0, inner);
    out.c_long = summarize(out.gbar2c, outer, INFINITY);
    return out;
}

struct CompareProducts {
    CountProducts thermal;
    CountProducts poisson;
    std::vector<double> z_gbar2c;
    std::vector<double> z_g2bar_si;
    double max_abs_z_gbar2c = 0.0;
    std::size_t compared_bins = 0;
};

/// Thermal and Poisson runs of one scenario. The Poisson run uses seed + 1 so the
/// two runs are statistically independent.
inline CompareProducts run_compare(const Scenario& s, std::size_t shards = 1) {
    Scenario thermal = s, poisson = s;
    thermal.model = SourceModel::thermal;
    poisson.model = SourceModel::poisson;
    poisson.seed = s.seed + 1;
    CompareProducts out;
    out.thermal = run_count(thermal, run_simulation(thermal), shards);
    out.poisson = run_count(poisson, run_simulation(poisson), shards);
    out.z_gbar2c = z_scores(out.thermal.gbar2c, out.poisson.gbar2c);
    out.z_g2bar_si = z_scores(out.thermal.g2bar_si, out.poisson.g2bar_si);
    for (double z : out.z_gbar2c) {
        if (std::isnan(z)) continue;
        out.max_abs_z_gbar2c = std::max(out.max_abs_z_gbar2c, std::abs(z));
        ++out.compared_bins;
    }
    return out;
}

} // namespace spdclab
