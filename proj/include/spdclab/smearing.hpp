#pragma once

// Detector jitter plus software coincidence window, modelled as a moving
// average: a 2*tauc box convolved with a 2*taud uniform jitter box. The result
// is a unit-area trapezoid with plateau height p = 1/(2 tauc) when tauc > taud.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "spdclab/errors.hpp"
#include "spdclab/grid.hpp"
#include "spdclab/parallel.hpp"
#include "spdclab/spdc_model.hpp"

namespace spdclab {

class ResponseKernel {
public:
    ResponseKernel(double tauc, double jitter, double step) : tauc_(tauc), jitter_(jitter), step_(step) {
        if (!(tauc > 0.0) || !std::isfinite(tauc)) throw invalid_parameter("coincidence half-width must be positive");
        if (!(jitter >= 0.0) || !std::isfinite(jitter)) throw invalid_parameter("jitter must be >= 0");
        if (!(step > 0.0)) throw invalid_parameter("kernel grid step must be positive");
        const double finest = jitter > 0.0 ? std::min(jitter, tauc) : tauc;
        if (step > finest / 20.0 * (1.0 + 1e-12)) {
            throw invalid_parameter("kernel grid too coarse: step must be <= min(taud, tauc)/20");
        }
        inner_ = std::abs(tauc - jitter);
        outer_ = tauc + jitter;
        peak_ = 1.0 / (2.0 * std::max(tauc, jitter));

        half_count_ = static_cast<std::size_t>(std::ceil(outer_ / step - 0.5 - 1e-12));
        const std::size_t n = 2 * half_count_ + 1;
        std::vector<double> edges(n + 1);
        for (std::size_t j = 0; j <= n; ++j) {
            edges[j] = (static_cast<double>(j) - static_cast<double>(half_count_) - 0.5) * step;
        }
        samples_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            samples_[k] = (primitive(edges[k + 1]) - primitive(edges[k])) / step;
        }
    }

    double coincidence_halfwidth() const { return tauc_; }
    double jitter() const { return jitter_; }
    double step() const { return step_; }

    /// True when a flat top of height 1/(2 tauc) exists.
    bool has_plateau() const { return tauc_ > jitter_; }

    /// p: plateau height, or the maximum value when there is no proper plateau.
    double plateau_height() const { return peak_; }

    /// |tau| below which the kernel is flat.
    double plateau_halfwidth() const { return inner_; }

    /// |tau| beyond which the kernel vanishes.
    double support() const { return outer_; }

    /// Cell-averaged samples at k*step, k in [-half_count, half_count].
    const std::vector<double>& samples() const { return samples_; }
    std::size_t half_count() const { return half_count_; }
    double sample(std::ptrdiff_t k) const { return samples_[static_cast<std::size_t>(k + static_cast<std::ptrdiff_t>(half_count_))]; }

    /// Discrete integral, sum(samples) * step.
    double area() const {
        double s = 0.0;
        for (double v : samples_) s += v;
        return s * step_;
    }

    /// Continuous kernel value.
    double value(double tau) const {
        const double s = std::abs(tau);
        if (s <= inner_) return peak_;
        if (s >= outer_) return 0.0;
        return peak_ * (outer_ - s) / (outer_ - inner_);
    }

private:
    // Integral of the continuous kernel from 0 to x.
    double primitive(double x) const {
        const double s = std::abs(x);
        double v;
        if (s <= inner_) {
            v = peak_ * s;
        } else if (s >= outer_) {
            v = 0.5;
        } else {
            const double w = outer_ - inner_;
            v = peak_ * inner_ + peak_ * (w * w - (outer_ - s) * (outer_ - s)) / (2.0 * w);
        }
        return x < 0.0 ? -v : v;
    }

    double tauc_;
    double jitter_;
    double step_;
    double inner_ = 0.0;
    double outer_ = 0.0;
    double peak_ = 0.0;
    std::size_t half_count_ = 0;
    std::vector<double> samples_;
};

inline ResponseKernel build_kernel(double tauc, double jitter, double grid_step) {
    return ResponseKernel(tauc, jitter, grid_step);
}

/// Leading-order plateau values of the smeared observables, with X = p/R.
struct PlateauPrediction {
    double x = 0.0;
    double g2si_plateau = 0.0;  // 1 + X
    double nssi_short = 0.0;    // R^3 (1 + 2X)
    double nssi_long = 0.0;     // R^3 (1 + X)
    double gbar2c_short = 0.0;  // (1 + 2X) / (1 + X)^2
};

inline PlateauPrediction predict_plateaus(const SourceParams& params, const ResponseKernel& kernel) {
    params.validate();
    const double r = params.pair_rate;
    const double r3 = r * r * r;
    PlateauPrediction out;
    out.x = kernel.plateau_height() / r;
    out.g2si_plateau = 1.0 + out.x;
    out.nssi_short = r3 * (1.0 + 2.0 * out.x);
    out.nssi_long = r3 * (1.0 + out.x);
    out.gbar2c_short = (1.0 + 2.0 * out.x) / ((1.0 + out.x) * (1.0 + out.x));
    return out;
}

namespace detail {

inline constexpr std::array<double, 3> gl_nodes{-0.7745966692414834, 0.0, 0.7745966692414834};
inline constexpr std::array<double, 3> gl_weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

// (1/h^2) * integral over the square cell centred at (x0, y0) of R^2(x - y).
// R^2 is piecewise polynomial of degree <= 2, the cell's x-y density is
// piecewise linear, so 3-point Gauss-Legendre per piece is exact.
inline double cell_average_auto_sq_diagonal(const CorrelationPair& rc, double u0, double h) {
    const double s = rc.support();
    const double lo = std::max(u0 - h, -s);
    const double hi = std::min(u0 + h, s);
    if (!(lo < hi)) return 0.0;
    std::array<double, 8> cuts{lo, hi, u0 - h, u0, u0 + h, -s, 0.0, s};
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    double prev = lo;
    for (double c : cuts) {
        if (c <= prev || c > hi) continue;
        const double mid = 0.5 * (prev + c);
        const double half = 0.5 * (c - prev);
        for (std::size_t q = 0; q < 3; ++q) {
            const double u = mid + half * gl_nodes[q];
            total += gl_weights[q] * half * rc.auto_sq(u) * (h - std::abs(u - u0));
        }
        prev = c;
    }
    return total / (h * h);
}

// (1/h^2) * integral over the cell of 2 C(x) C(y) R(x - y). Composite midpoint
// rule on the part of the cell inside the cross-correlation support.
inline double cell_average_central_peak(const CorrelationPair& rc, double x0, double y0, double h) {
    const double s = rc.support();
    const double xl = std::max(x0 - 0.5 * h, -s), xh = std::min(x0 + 0.5 * h, s);
    const double yl = std::max(y0 - 0.5 * h, -s), yh = std::min(y0 + 0.5 * h, s);
    if (!(xl < xh) || !(yl < yh)) return 0.0;
    constexpr int m = 48;
    const double dx = (xh - xl) / m, dy = (yh - yl) / m;
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        const double x = xl + (i + 0.5) * dx;
        const double cx = rc.cross(x);
        if (cx == 0.0) continue;
        for (int j = 0; j < m; ++j) {
            const double y = yl + (j + 0.5) * dy;
            total += 2.0 * cx * rc.cross(y) * rc.auto_rate(x - y);
        }
    }
    return total * dx * dy / (h * h);
}

inline std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
    if (i < 0) return 0;
    if (static_cast<std::size_t>(i) >= n) return n - 1;
    return static_cast<std::size_t>(i);
}

} // namespace detail

/// Cell-averaged g2_si on `grid`: each value is the mean over [tau - h/2, tau + h/2],
/// so a peak narrower than the grid keeps its exact area 1/R.
inline CorrelationCurve sample_g2_si(const CorrelationPair& rc, const UniformGrid& grid) {
    const double r = rc.params().pair_rate;
    const double h = grid.step;
    CorrelationCurve out{grid, std::vector<double>(grid.size), Unit::dimensionless};
    for (std::size_t i = 0; i < grid.size; ++i) {
        const double t = grid[i];
        out.values[i] = 1.0 + rc.cross_sq_integral(t - 0.5 * h, t + 0.5 * h) / (h * r * r);
    }
    return out;
}

/// Cell-averaged P_ssi over (t1 - ti, t2 - ti). Both axes must share one step.
inline CorrelationSurface sample_p_ssi_surface(const CorrelationPair& rc, const UniformGrid& x, const UniformGrid& y) {
    if (!same_step(x.step, y.step)) throw grid_mismatch("surface axes must share one grid step");
    if (static_cast<double>(x.size) * static_cast<double>(y.size) > 1e8) {
        throw regime_violation("surface grid exceeds 1e8 cells");
    }
    const double r = rc.params().pair_rate;
    const double h = x.step;
    std::vector<double> ridge_x(x.size), ridge_y(y.size);
    for (std::size_t i = 0; i < x.size; ++i) ridge_x[i] = rc.cross_sq_integral(x[i] - 0.5 * h, x[i] + 0.5 * h) / h;
    for (std::size_t j = 0; j < y.size; ++j) ridge_y[j] = rc.cross_sq_integral(y[j] - 0.5 * h, y[j] + 0.5 * h) / h;

    CorrelationSurface out{x, y, std::vector<double>(x.size * y.size), Unit::hz3};
    const double floor = r * r * r;
    parallel_for(y.size, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            for (std::size_t i = 0; i < x.size; ++i) {
                double v = floor + r * (ridge_x[i] + ridge_y[j]);
                v += r * detail::cell_average_auto_sq_diagonal(rc, x[i] - y[j], h);
                v += detail::cell_average_central_peak(rc, x[i], y[j], h);
                out.at(i, j) = v;
            }
        }
    });
    return out;
}

/// Discrete convolution with the kernel; values beyond the grid repeat the edge values.
inline CorrelationCurve smear_curve(const CorrelationCurve& curve, const ResponseKernel& kernel) {
    if (!same_step(curve.delays.step, kernel.step())) {
        throw grid_mismatch("curve step differs from kernel step");
    }
    const std::size_t n = curve.size();
    if (n < kernel.samples().size()) {
        throw grid_mismatch("curve grid shorter than the kernel support");
    }
    const auto half = static_cast<std::ptrdiff_t>(kernel.half_count());
    const double h = kernel.step();
    CorrelationCurve out{curve.delays, std::vector<double>(n), curve.unit};
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -half; k <= half; ++k) {
            acc += curve.values[detail::clamp_index(static_cast<std::ptrdiff_t>(i) - k, n)] * kernel.sample(k);
        }
        out.values[i] = acc * h;
    }
    return out;
}

/// Separable two-pass convolution along both axes.
inline CorrelationSurface smear_surface(const CorrelationSurface& surface, const ResponseKernel& kernel) {
    if (!same_step(surface.x.step, kernel.step()) || !same_step(surface.y.step, kernel.step())) {
        throw grid_mismatch("surface step differs from kernel step");
    }
    if (static_cast<double>(surface.x.size) * static_cast<double>(surface.y.size) > 1e8) {
        throw regime_violation("surface grid exceeds 1e8 cells");
    }
    const std::size_t nx = surface.x.size, ny = surface.y.size;
    if (nx < kernel.samples().size() || ny < kernel.samples().size()) {
        throw grid_mismatch("surface grid shorter than the kernel support");
    }
    const auto half = static_cast<std::ptrdiff_t>(kernel.half_count());
    const double h = kernel.step();

    CorrelationSurface pass{surface.x, surface.y, std::vector<double>(nx * ny), surface.unit};
    parallel_for(ny, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const double* row = &surface.values[j * nx];
            for (std::size_t i = 0; i < nx; ++i) {
                double acc = 0.0;
                for (std::ptrdiff_t k = -half; k <= half; ++k) {
                    acc += row[detail::clamp_index(static_cast<std::ptrdiff_t>(i) - k, nx)] * kernel.sample(k);
                }
                pass.at(i, j) = acc * h;
            }
        }
    });

    CorrelationSurface out{surface.x, surface.y, std::vector<double>(nx * ny, 0.0), surface.unit};
    parallel_for(ny, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            double* dst = &out.values[j * nx];
            for (std::ptrdiff_t k = -half; k <= half; ++k) {
                const double w = kernel.sample(k) * h;
                const double* src = &pass.values[detail::clamp_index(static_cast<std::ptrdiff_t>(j) - k, ny) * nx];
                for (std::size_t i = 0; i < nx; ++i) dst[i] += w * src[i];
            }
        }
    });
    return out;
}

/// Smeared signal-idler coherence on `grid` (step must match the kernel).
inline CorrelationCurve gbar2_si_analytic(const CorrelationPair& rc, const ResponseKernel& kernel, const UniformGrid& grid) {
    return smear_curve(sample_g2_si(rc, grid), kernel);
}

namespace detail {

// sum_k f(tau - k h) w_k with w_k the kernel cell weights; exact, no edge extension.
template <class F>
double convolve_at(const ResponseKernel& kernel, double tau, F&& f) {
    const auto half = static_cast<std::ptrdiff_t>(kernel.half_count());
    const double h = kernel.step();
    double acc = 0.0;
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
        acc += f(tau - static_cast<double>(k) * h) * kernel.sample(k);
    }
    return acc * h;
}

} // namespace detail

/// Time-averaged conditioned coherence N_ssi(0, tau) R / (N_si(0) N_si(tau)) built
/// from the smeared P_ssi slice at t1 = ti and the smeared signal-idler rate.
inline CorrelationCurve gbar2c_analytic(const CorrelationPair& rc, const ResponseKernel& kernel, const UniformGrid& tau_grid) {
    if (!same_step(tau_grid.step, kernel.step())) throw grid_mismatch("delay grid step differs from kernel step");
    const double r = rc.params().pair_rate;
    const double h = kernel.step();
    const auto half = static_cast<std::ptrdiff_t>(kernel.half_count());

    auto g2si_cell = [&](double t) { return 1.0 + rc.cross_sq_integral(t - 0.5 * h, t + 0.5 * h) / (h * r * r); };
    const double gbar_zero = detail::convolve_at(kernel, 0.0, g2si_cell);

    // Smear P_ssi along t1 - ti at t1 = ti, for every t2 - ti the second pass needs.
    const UniformGrid x = UniformGrid::centered(h, kernel.half_count());
    const UniformGrid y{tau_grid.origin - static_cast<double>(half) * h, h, tau_grid.size + 2 * kernel.half_count()};
    const CorrelationSurface cells = sample_p_ssi_surface(rc, x, y);
    std::vector<double> slice(y.size);
    for (std::size_t j = 0; j < y.size; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size; ++i) acc += cells.at(i, j) * kernel.samples()[i];
        slice[j] = acc * h;
    }

    CorrelationCurve out{tau_grid, std::vector<double>(tau_grid.size), Unit::dimensionless};
    const double r3 = r * r * r;
    for (std::size_t n = 0; n < tau_grid.size; ++n) {
        double nssi = 0.0;
        for (std::ptrdiff_t k = -half; k <= half; ++k) {
            nssi += slice[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(n) + half - k)] * kernel.sample(k);
        }
        nssi *= h;
        const double gbar_tau = detail::convolve_at(kernel, tau_grid[n], g2si_cell);
        out.values[n] = nssi / (r3 * gbar_zero * gbar_tau);
    }
    return out;
}

} // namespace spdclab
