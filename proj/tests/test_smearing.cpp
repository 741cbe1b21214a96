#include <gtest/gtest.h>

#include <cmath>

#include "spdclab/smearing.hpp"

using namespace spdclab;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double excess_integral(const CorrelationCurve& c) {
    double s = 0.0;
    for (double v : c.values) s += v - 1.0;
    return s * c.delays.step;
}

} // namespace

TEST(Kernel, ZeroJitterIsBox) {
    const ResponseKernel k(1.5e-9, 0.0, 1.5e-9 / 20);
    EXPECT_TRUE(k.has_plateau());
    EXPECT_DOUBLE_EQ(k.plateau_height(), 1.0 / 3e-9);
    EXPECT_DOUBLE_EQ(k.support(), 1.5e-9);
    EXPECT_NEAR(k.area(), 1.0, 1e-12);
}

TEST(Kernel, TrapezoidGeometry) {
    const ResponseKernel k(1.5e-9, 0.35e-9, 0.35e-9 / 20);
    EXPECT_NEAR(k.plateau_halfwidth(), 1.15e-9, 1e-21);
    EXPECT_NEAR(k.support(), 1.85e-9, 1e-21);
    EXPECT_EQ(k.value(1.0e-9), k.plateau_height());
    EXPECT_EQ(k.value(1.9e-9), 0.0);
    EXPECT_NEAR(k.value(1.5e-9), 0.5 * k.plateau_height(), 1e-6 * k.plateau_height());
    EXPECT_NEAR(k.area(), 1.0, 1e-12);
}

TEST(Kernel, DeskPlateauHeight) {
    const ResponseKernel k(5e-9, 1e-9, 1e-9 / 20);
    EXPECT_DOUBLE_EQ(k.plateau_height(), 1e8);
    EXPECT_NEAR(k.area(), 1.0, 1e-12);
    // Samples equal cell integrals of the continuous kernel: midpoint quadrature agrees.
    const double h = k.step();
    for (std::ptrdiff_t j = -static_cast<std::ptrdiff_t>(k.half_count()); j <= static_cast<std::ptrdiff_t>(k.half_count()); ++j) {
        double acc = 0.0;
        const int m = 400;
        for (int q = 0; q < m; ++q) acc += k.value((j - 0.5 + (q + 0.5) / m) * h);
        EXPECT_NEAR(k.sample(j), acc / m, 1e-5 * k.plateau_height());
    }
}

TEST(Kernel, UnitAreaAcrossRegimes) {
    for (double jitter : {0.0, 0.1e-9, 0.35e-9, 1.5e-9, 3e-9}) {
        const double step = (jitter > 0.0 ? std::min(jitter, 1.5e-9) : 1.5e-9) / 23.0;
        const ResponseKernel k(1.5e-9, jitter, step);
        EXPECT_LT(std::abs(k.area() - 1.0), 1e-12) << jitter;
    }
}

TEST(Kernel, NoPlateauReportsMaximum) {
    const ResponseKernel k(0.2e-9, 0.5e-9, 0.2e-9 / 20);
    EXPECT_FALSE(k.has_plateau());
    EXPECT_DOUBLE_EQ(k.plateau_height(), 1.0 / 1e-9);
    double max_sample = 0.0;
    for (double v : k.samples()) max_sample = std::max(max_sample, v);
    EXPECT_NEAR(max_sample, k.plateau_height(), 1e-9 * k.plateau_height());
}

TEST(Kernel, RejectsCoarseGridAndBadParameters) {
    EXPECT_THROW(ResponseKernel(1.5e-9, 0.35e-9, 0.35e-9 / 10), invalid_parameter);
    EXPECT_THROW(ResponseKernel(1.5e-9, 0.0, 1.5e-9 / 19), invalid_parameter);
    EXPECT_THROW(ResponseKernel(0.0, 0.0, 1e-12), invalid_parameter);
    EXPECT_THROW(ResponseKernel(1e-9, -1e-12, 1e-12), invalid_parameter);
}

TEST(SmearCurve, ConstantStaysConstant) {
    const ResponseKernel k(5e-9, 1e-9, 5e-11);
    const UniformGrid g = UniformGrid::covering(20e-9, k.step());
    const CorrelationCurve c{g, std::vector<double>(g.size, 3.25), Unit::dimensionless};
    for (double v : smear_curve(c, k).values) EXPECT_NEAR(v, 3.25, 1e-13);
}

TEST(SmearCurve, RejectsMismatchedGrid) {
    const ResponseKernel k(5e-9, 1e-9, 5e-11);
    const UniformGrid g = UniformGrid::covering(20e-9, 4e-11);
    const CorrelationCurve c{g, std::vector<double>(g.size, 1.0), Unit::dimensionless};
    EXPECT_THROW(smear_curve(c, k), grid_mismatch);
    const UniformGrid tiny = UniformGrid::covering(1e-9, 5e-11);
    EXPECT_THROW(smear_curve(CorrelationCurve{tiny, std::vector<double>(tiny.size, 1.0)}, k), grid_mismatch);
}

TEST(SmearCurve, ReferencePlateauWithoutJitter) {
    const SourceParams p{43e6, 1.4e-5 / 43e6, Shape::box, true};
    const ResponseKernel k(1.5e-9, 0.0, 1.5e-9 / 100);
    const auto s = gbar2_si_analytic(CorrelationPair(p), k, UniformGrid::covering(4e-9, k.step()));
    const double x = 1.0 / (2.0 * 43e6 * 1.5e-9);
    EXPECT_NEAR(x, 7.752, 5e-4);
    EXPECT_LT(rel(s.values[s.index_of(0.0)], 1.0 + x), 1e-9);
    EXPECT_LT(rel(s.values[s.index_of(1.0e-9)], 1.0 + x), 1e-9);
    EXPECT_NEAR(s.values[s.index_of(2.0e-9)], 1.0, 1e-12);
}

TEST(SmearCurve, PlateauAndTailWithJitter) {
    const SourceParams p{43e6, 1.4e-5 / 43e6, Shape::box, true};
    const ResponseKernel k(1.5e-9, 0.35e-9, 0.35e-9 / 40);
    const auto pred = predict_plateaus(p, k);
    const auto s = gbar2_si_analytic(CorrelationPair(p), k, UniformGrid::covering(4e-9, k.step()));
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double t = std::abs(s.delay(i));
        if (t < 1.15e-9 - 2 * p.coherence_time - k.step()) {
            EXPECT_LT(rel(s.values[i], pred.g2si_plateau), 1e-6) << t;
        }
        if (t > 1.85e-9 + p.coherence_time + k.step()) {
            EXPECT_NEAR(s.values[i], 1.0, 1e-12) << t;
        }
    }
}

TEST(SmearCurve, MonotoneTransitionAtWindowEdge) {
    const SourceParams p{2e7, 1e-11, Shape::box, true};
    const ResponseKernel k(5e-9, 0.0, 5e-9 / 50);
    const auto c = gbar2_si_analytic(CorrelationPair(p), k, UniformGrid::covering(12e-9, k.step()));
    const double edge = c.values[c.index_of(5e-9)];
    EXPECT_LT(edge, 6.0);
    EXPECT_GT(edge, 1.0);
    for (std::size_t i = c.index_of(0.0); i + 1 < c.size(); ++i) EXPECT_GE(c.values[i] + 1e-12, c.values[i + 1]);
}

TEST(SmearCurve, ExcessIntegralConserved) {
    for (Shape shape : {Shape::box, Shape::triangle}) {
        for (double dt : {1e-11, 2e-10, 3e-9}) {
            const SourceParams p{2e7, dt, shape, true};
            const ResponseKernel k(5e-9, 1e-9, 5e-11);
            const auto c = gbar2_si_analytic(CorrelationPair(p), k, UniformGrid::covering(15e-9, k.step()));
            EXPECT_LT(rel(excess_integral(c), 1.0 / p.pair_rate), 1e-9) << shape_name(shape) << " " << dt;
        }
    }
}

// Box and triangle peaks with equal area smear to curves that agree exactly on
// the plateau and in the tails; in the kernel's transition corners they differ by
// a second-moment term, X dt / (48 taud) at the outer corner, so O(dt/tauc).
TEST(SmearCurve, ShapeDifferenceConfinedToCornersAndOrderDtOverTauc) {
    const double tauc = 1.5e-9, taud = 0.35e-9, r = 43e6;
    double previous = 0.0;
    for (double dt : {tauc / 100, tauc / 200}) {
        const ResponseKernel k(tauc, taud, dt / 10);
        const auto grid = UniformGrid::covering(4e-9, k.step());
        const auto box = gbar2_si_analytic(CorrelationPair({r, dt, Shape::box, true}), k, grid);
        const auto tri = gbar2_si_analytic(CorrelationPair({r, dt, Shape::triangle, true}), k, grid);
        double worst = 0.0;
        for (std::size_t i = 0; i < box.size(); ++i) {
            const double t = std::abs(box.delay(i));
            const double d = rel(tri.values[i], box.values[i]);
            const bool near_corner = std::abs(t - (tauc - taud)) < 1.5 * dt || std::abs(t - (tauc + taud)) < 1.5 * dt;
            if (!near_corner) {
                EXPECT_LT(d, 1e-9) << t;
            }
            worst = std::max(worst, d);
        }
        const double x = 1.0 / (2.0 * r * tauc);
        EXPECT_NEAR(worst, x * dt / (48.0 * taud), 0.1 * x * dt / (48.0 * taud)) << dt;
        if (previous > 0.0) {
            EXPECT_NEAR(worst / previous, 0.5, 0.05);
        }
        previous = worst;
    }
}

TEST(PredictPlateaus, ReferenceAndDeskNumbers) {
    const SourceParams reference{43e6, 1.4e-5 / 43e6};
    const auto pp = predict_plateaus(reference, ResponseKernel(1.5e-9, 0.0, 1.5e-9 / 20));
    EXPECT_NEAR(pp.x, 7.752, 5e-4);
    EXPECT_NEAR(pp.gbar2c_short, 16.504 / 76.597, 1e-4);
    EXPECT_NEAR(pp.gbar2c_short, 0.2155, 1e-4);
    EXPECT_NEAR(pp.nssi_short / std::pow(43e6, 3), 1.0 + 2.0 * pp.x, 1e-12);
    EXPECT_NEAR(pp.nssi_long / std::pow(43e6, 3), 1.0 + pp.x, 1e-12);

    const auto desk = predict_plateaus(SourceParams{2e7, 1e-9}, ResponseKernel(5e-9, 1e-9, 5e-11));
    EXPECT_DOUBLE_EQ(desk.x, 5.0);
    EXPECT_DOUBLE_EQ(desk.g2si_plateau, 6.0);
    EXPECT_NEAR(desk.gbar2c_short, 11.0 / 36.0, 1e-15);

    const auto dim = predict_plateaus(SourceParams{1.0, 1e-9}, ResponseKernel(5e-9, 0.0, 2.5e-10));
    EXPECT_NEAR(dim.gbar2c_short * dim.x, 2.0, 1e-7);
}

TEST(Gbar2c, LimitsAtFineCoherenceTime) {
    const SourceParams p{2e7, 5e-11, Shape::box, true};
    const ResponseKernel k(5e-9, 1e-9, 5e-11);
    const auto pred = predict_plateaus(p, k);
    const auto c = gbar2c_analytic(CorrelationPair(p), k, UniformGrid::covering(16e-9, k.step()));
    // The central 2 C C R term lifts the whole short-delay region by about
    // X (dt/tauc) / (1 + 2X); the thermal diagonal reaches out to 2 (tauc + taud).
    const double lift = pred.x * (p.coherence_time / 5e-9) / (1.0 + 2.0 * pred.x);
    for (double t : {0.0, 1e-9, 3e-9}) {
        const double v = c.values[c.index_of(t)];
        EXPECT_GT(v, pred.gbar2c_short) << t;
        EXPECT_LT(rel(v, pred.gbar2c_short), 1.5 * lift) << t;
    }
    EXPECT_NEAR(c.values[c.index_of(8e-9)], 1.0, 1e-3);
    EXPECT_NEAR(c.values[c.index_of(12.2e-9)], 1.0, 1e-12);
    EXPECT_NEAR(c.values.front(), 1.0, 1e-12);
}

TEST(Gbar2c, EdgeValueBetweenPlateauAndOne) {
    const SourceParams p{2e7, 5e-11, Shape::box, true};
    const ResponseKernel k(5e-9, 0.0, 5e-9 / 40);
    const auto c = gbar2c_analytic(CorrelationPair(p), k, UniformGrid::covering(8e-9, k.step()));
    const double v = c.values[c.index_of(5e-9)];
    EXPECT_GT(v, 11.0 / 36.0);
    EXPECT_LT(v, 1.0);
}

TEST(SmearSurface, ThreeLevelStructure) {
    const double dt = 1e-11;
    const SourceParams p{2e7, dt, Shape::box, true};
    const double tauc = 100 * dt, taud = tauc / 5;
    const ResponseKernel k(tauc, taud, dt);
    const auto grid = UniformGrid::covering(3 * (tauc + taud), k.step());
    const auto s = smear_surface(sample_p_ssi_surface(CorrelationPair(p), grid, grid), k);
    const double r3 = std::pow(p.pair_rate, 3);
    const auto pred = predict_plateaus(p, k);
    const std::size_t mid = grid.size / 2, last = grid.size - 1;
    const double center = s.at(mid, mid), ridge = s.at(mid, last), floor = s.at(0, last);
    EXPECT_LT(rel(floor, r3), 1e-6);
    EXPECT_LT(rel(ridge, pred.nssi_long), 1e-6);
    const double ratio = (center - r3) / (ridge - r3);
    EXPECT_NEAR(ratio, 2.0, 5.0 * dt / tauc);
    // Symmetric under t1 <-> t2.
    for (std::size_t i = 0; i < grid.size; i += 7)
        for (std::size_t j = 0; j < grid.size; j += 5) EXPECT_LT(rel(s.at(i, j), s.at(j, i)), 1e-12);
}

TEST(SmearSurface, Guards) {
    const ResponseKernel k(1e-9, 0.0, 5e-11);
    const auto g = UniformGrid::covering(3e-9, 4e-11);
    const SourceParams p{2e7, 1e-11};
    EXPECT_THROW(smear_surface(sample_p_ssi_surface(CorrelationPair(p), g, g), k), grid_mismatch);
    const auto huge = UniformGrid::centered(1e-12, 6000);
    EXPECT_THROW(sample_p_ssi_surface(CorrelationPair(p), huge, huge), regime_violation);
}
