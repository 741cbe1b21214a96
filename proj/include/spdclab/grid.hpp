#pragma once

#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

#include "spdclab/errors.hpp"

namespace spdclab {

/// Physical unit carried by sampled curves and surfaces.
enum class Unit {
    dimensionless,
    hz,         // rate, 1/s
    hz2,        // rate^2
    hz3,        // rate^3
    amplitude,  // sqrt(rate/time), the unit of C(tau)
    per_second, // kernel density
};

constexpr std::string_view unit_name(Unit u) {
    switch (u) {
    case Unit::dimensionless: return "1";
    case Unit::hz: return "Hz";
    case Unit::hz2: return "Hz^2";
    case Unit::hz3: return "Hz^3";
    case Unit::amplitude: return "sqrt(Hz/s)";
    case Unit::per_second: return "1/s";
    }
    return "?";
}

/// Uniform grid `origin + i*step`, i in [0, size).
struct UniformGrid {
    double origin = 0.0;
    double step = 1.0;
    std::size_t size = 0;

    double operator[](std::size_t i) const { return origin + static_cast<double>(i) * step; }
    double back() const { return (*this)[size - 1]; }

    /// Grid of 2n+1 points symmetric around zero.
    static UniformGrid centered(double step, std::size_t half_count) {
        if (!(step > 0.0)) {
            throw invalid_parameter("grid step must be positive");
        }
        return {-static_cast<double>(half_count) * step, step, 2 * half_count + 1};
    }

    /// Smallest symmetric grid with the given step reaching at least `half_span`.
    static UniformGrid covering(double half_span, double step) {
        if (!(step > 0.0) || !(half_span >= 0.0)) {
            throw invalid_parameter("grid span must be >= 0 and step > 0");
        }
        return centered(step, static_cast<std::size_t>(std::ceil(half_span / step - 1e-9)));
    }

    std::vector<double> points() const {
        std::vector<double> out(size);
        for (std::size_t i = 0; i < size; ++i) {
            out[i] = (*this)[i];
        }
        return out;
    }
};

inline bool same_step(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

/// Values sampled on a uniform delay grid (seconds).
struct CorrelationCurve {
    UniformGrid delays;
    std::vector<double> values;
    Unit unit = Unit::dimensionless;

    std::size_t size() const { return values.size(); }
    double delay(std::size_t i) const { return delays[i]; }

    /// Index of the grid point nearest to `tau` (clamped).
    std::size_t index_of(double tau) const {
        const double x = std::round((tau - delays.origin) / delays.step);
        if (x <= 0.0) return 0;
        return std::min(static_cast<std::size_t>(x), size() - 1);
    }
};

/// Values on a square grid over (t1 - ti, t2 - ti); row-major with t2 as the row index.
struct CorrelationSurface {
    UniformGrid x; // t1 - ti
    UniformGrid y; // t2 - ti
    std::vector<double> values;
    Unit unit = Unit::dimensionless;

    double& at(std::size_t ix, std::size_t iy) { return values[iy * x.size + ix]; }
    double at(std::size_t ix, std::size_t iy) const { return values[iy * x.size + ix]; }
};

} // namespace spdclab
