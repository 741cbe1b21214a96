// Prints the smeared plateau values for the coincidence half-widths used when
// re-analysing the published data, next to the numerically smeared curves.

#include <cstdio>

#include "spdclab/spdclab.hpp"

int main() {
    using namespace spdclab;
    const SourceParams source{43e6, 1.4e-5 / 43e6, Shape::box, true};
    const double jitter = 0.35e-9;
    const CorrelationPair rc(source);

    std::printf("%10s %10s %12s %12s %14s %14s\n", "tauc[ns]", "X", "1+X", "gbar2si(0)", "(1+2X)/(1+X)^2", "gbar2c(0)");
    for (double tauc : {0.39e-9, 0.5e-9, 1.5e-9}) {
        const double step = std::min(tauc, jitter) / 40.0;
        const ResponseKernel kernel(tauc, jitter, step);
        const PlateauPrediction pred = predict_plateaus(source, kernel);
        const UniformGrid grid = UniformGrid::covering(2.0 * (tauc + jitter), step);
        const auto si = gbar2_si_analytic(rc, kernel, grid);
        const auto c = gbar2c_analytic(rc, kernel, UniformGrid{0.0, step, 1});
        std::printf("%10.3f %10.4f %12.4f %12.4f %14.5f %14.5f\n", tauc * 1e9, pred.x, pred.g2si_plateau,
                    si.values[si.index_of(0.0)], pred.gbar2c_short, c.values[0]);
    }
    return 0;
}
