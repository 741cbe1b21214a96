#pragma once

// Closed-form correlation functions of a continuously pumped, low-gain SPDC
// source. Every observable is built from two real even functions:
//   R(tau)  first-order coherence of either arm, R(0) = pair rate R
//   C(tau)  signal-idler cross correlation, C(0)^2 / R^2 = 1 / (R dt)

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>

#include "spdclab/errors.hpp"

namespace spdclab {

enum class Shape { box, triangle };

constexpr std::string_view shape_name(Shape s) { return s == Shape::box ? "box" : "triangle"; }

inline Shape parse_shape(std::string_view s) {
    if (s == "box") return Shape::box;
    if (s == "triangle") return Shape::triangle;
    throw invalid_parameter("unknown source shape '" + std::string(s) + "' (expected box|triangle)");
}

struct SourceParams {
    double pair_rate = 0.0;       // R, 1/s
    double coherence_time = 0.0;  // dt, s
    Shape shape = Shape::box;
    bool cross_correlation = true; // false forces C == 0 (accidentals only)

    /// Mean number of pairs per coherence cell, mu = R * dt.
    double occupancy() const { return pair_rate * coherence_time; }

    /// The low-gain model is only trustworthy well below one pair per cell.
    bool high_occupancy() const { return occupancy() >= 0.1; }

    void validate() const {
        if (!(pair_rate > 0.0) || !std::isfinite(pair_rate)) {
            throw invalid_parameter("pair_rate must be positive and finite");
        }
        if (!(coherence_time > 0.0) || !std::isfinite(coherence_time)) {
            throw invalid_parameter("coherence_time must be positive and finite");
        }
        if (!std::isfinite(occupancy())) {
            throw invalid_parameter("pair_rate * coherence_time is not finite");
        }
    }
};

/// R(tau) and C(tau) for a validated source.
class CorrelationPair {
public:
    explicit CorrelationPair(const SourceParams& params) : p_(params) {
        p_.validate();
        c0_sq_ = p_.cross_correlation ? p_.pair_rate / p_.coherence_time : 0.0;
    }

    const SourceParams& params() const { return p_; }

    /// Half-width of the support of both functions.
    double support() const { return p_.shape == Shape::box ? 0.5 * p_.coherence_time : p_.coherence_time; }

    /// R(tau), 1/s.
    double auto_rate(double tau) const { return p_.pair_rate * auto_profile(std::abs(tau)); }

    /// C(tau) >= 0, sqrt(rate/time).
    double cross(double tau) const { return std::sqrt(cross_sq(tau)); }

    double cross_sq(double tau) const { return c0_sq_ * cross_profile(std::abs(tau)); }
    double auto_sq(double tau) const {
        const double r = auto_rate(tau);
        return r * r;
    }

    /// Integral of C^2 over [lo, hi].
    double cross_sq_integral(double lo, double hi) const {
        return c0_sq_ * (odd_primitive(hi, cross_power()) - odd_primitive(lo, cross_power()));
    }

    /// Integral of R^2 over [lo, hi].
    double auto_sq_integral(double lo, double hi) const {
        const double r2 = p_.pair_rate * p_.pair_rate;
        return r2 * (odd_primitive(hi, auto_power()) - odd_primitive(lo, auto_power()));
    }

private:
    // Profiles are 1 at the origin. Triangle: R decays linearly, C^2 decays linearly.
    double auto_profile(double s) const {
        const double dt = p_.coherence_time;
        if (p_.shape == Shape::box) return s <= 0.5 * dt ? 1.0 : 0.0;
        return s < dt ? 1.0 - s / dt : 0.0;
    }
    double cross_profile(double s) const { return auto_profile(s); }

    int cross_power() const { return 1; }
    int auto_power() const { return 2; }

    // Primitive of profile^k from 0 to |x|, signed like x.
    double odd_primitive(double x, int k) const {
        const double s = std::abs(x);
        const double dt = p_.coherence_time;
        double v = 0.0;
        if (p_.shape == Shape::box) {
            v = std::min(s, 0.5 * dt);
        } else {
            const double rest = 1.0 - std::min(s, dt) / dt;
            v = dt / (k + 1) * (1.0 - std::pow(rest, k + 1));
        }
        return x < 0.0 ? -v : v;
    }

    SourceParams p_;
    double c0_sq_ = 0.0;
};

inline CorrelationPair correlation_pair(const SourceParams& params) { return CorrelationPair(params); }

/// Signal-idler second-order coherence, 1 + C^2(tau)/R^2.
inline double g2_si(const CorrelationPair& rc, double tau) {
    const double r = rc.params().pair_rate;
    return 1.0 + rc.cross_sq(tau) / (r * r);
}
inline double g2_si(const SourceParams& params, double tau) { return g2_si(CorrelationPair(params), tau); }

/// Unconditioned signal-signal coherence, 1 + R^2(tau)/R^2 (thermal: 2 at zero delay).
inline double g2_ss_unconditional(const CorrelationPair& rc, double tau) {
    const double r = rc.params().pair_rate;
    return 1.0 + rc.auto_sq(tau) / (r * r);
}
inline double g2_ss_unconditional(const SourceParams& params, double tau) {
    return g2_ss_unconditional(CorrelationPair(params), tau);
}

/// Ideal signal-signal-idler triple-coincidence rate, 1/s^3.
inline double p_ssi(const CorrelationPair& rc, double t1, double t2, double ti) {
    const double r = rc.params().pair_rate;
    const double c1 = rc.cross(t1 - ti);
    const double c2 = rc.cross(t2 - ti);
    const double r12 = rc.auto_rate(t1 - t2);
    return 2.0 * c1 * c2 * r12 + r * (r * r + r12 * r12 + c1 * c1 + c2 * c2);
}
inline double p_ssi(const SourceParams& params, double t1, double t2, double ti) {
    return p_ssi(CorrelationPair(params), t1, t2, ti);
}

/// Triple rate on the measured diagonal t1 = ti, t2 = ti + tau.
inline double p_ssi_diag(const CorrelationPair& rc, double tau) { return p_ssi(rc, 0.0, tau, 0.0); }
inline double p_ssi_diag(const SourceParams& params, double tau) { return p_ssi_diag(CorrelationPair(params), tau); }

/// Conditioned second-order coherence of the signal arm after an idler detection at ti.
inline double g2_c(const CorrelationPair& rc, double t1, double t2, double ti) {
    const double r = rc.params().pair_rate;
    return p_ssi(rc, t1, t2, ti) / (r * r * r * g2_si(rc, t1 - ti) * g2_si(rc, t2 - ti));
}
inline double g2_c(const SourceParams& params, double t1, double t2, double ti) {
    return g2_c(CorrelationPair(params), t1, t2, ti);
}

struct LimitRatios {
    double heralding = 0.0; // P(t1, inf | ti) / P(-inf, inf | ti), equals g2_si(t1 - ti)
    double thermal = 0.0;   // P(t1, t2 | -inf) / P(t1, inf | -inf), equals g2_ss(t1 - t2)
};

/// Offset standing in for an infinite time argument at delay `tau`.
inline double infinity_offset(const CorrelationPair& rc, double tau) {
    const double offset = 1e3 * rc.params().coherence_time + 2.0 * std::abs(tau);
    if (!(offset > 4.0 * rc.support() + 2.0 * std::abs(tau))) {
        throw regime_violation("infinity offset does not exceed the correlation support");
    }
    return offset;
}

inline LimitRatios limit_ratios(const CorrelationPair& rc, double tau) {
    const double far = infinity_offset(rc, tau);
    LimitRatios out;
    out.heralding = p_ssi(rc, tau, far, 0.0) / p_ssi(rc, -far, far, 0.0);
    out.thermal = p_ssi(rc, tau, 0.0, -far) / p_ssi(rc, tau, tau + far, -far);
    return out;
}
inline LimitRatios limit_ratios(const SourceParams& params, double tau) {
    return limit_ratios(CorrelationPair(params), tau);
}

} // namespace spdclab
