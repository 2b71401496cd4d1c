// Analytical stability criteria for two inertia-damper systems coupled by a
// delayed virtual spring:
//
//   m1 x1'' + b1 x1' = k (x2(t - delta) - x1) + f1
//   m2 x2'' + b2 x2' = k (x1(t - delta) - x2) + f2
//
// The coupled pair is stable for every delay when k does not exceed a
// critical stiffness that depends only on the robots' inertia and damping.
// Above that stiffness there is a finite maximum tolerable delay, located by
// finding where a characteristic root first reaches the imaginary axis
// (zero-crossing method on the bivariate form of the characteristic
// equation, with z standing in for the delay term).
#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dyadstab/cubic.hpp"
#include "dyadstab/types.hpp"

namespace dyadstab {

/// Critical stiffness k_m = (b1^2 + b2^2) / (2 (m1 + m2)).
/// For k <= k_m the coupled pair is stable regardless of delay.
inline double critical_stiffness(const AxisDynamics& d1, const AxisDynamics& d2) {
    return (d1.damping * d1.damping + d2.damping * d2.damping) /
           (2.0 * (d1.mass + d2.mass));
}

/// Coefficients of the crossing cubic F(xi), xi = omega^2. Positive real
/// roots of F are the squared frequencies at which a characteristic root can
/// sit on the imaginary axis.
struct CubicCoefficients {
    double c3;
    double c2;
    double c1;
    double c0;
};

inline CubicCoefficients f_xi_coefficients(const AxisDynamics& d1, const AxisDynamics& d2,
                                           double stiffness) {
    if (!std::isfinite(stiffness) || stiffness < 0.0)
        throw std::invalid_argument("f_xi_coefficients: stiffness must be finite and >= 0");
    const double m1 = d1.mass, b1 = d1.damping;
    const double m2 = d2.mass, b2 = d2.damping;
    const double k = stiffness;
    const double t1 = b1 * b1 - 2.0 * k * m1;
    const double t2 = b2 * b2 - 2.0 * k * m2;
    CubicCoefficients c;
    c.c3 = m1 * m1 * m2 * m2;
    c.c2 = t1 * m2 * m2 + t2 * m1 * m1;
    c.c1 = t1 * t2 + k * k * (m1 * m1 + m2 * m2);
    c.c0 = k * k * (t1 + t2);
    return c;
}

/// Positive real roots of the cubic, ascending. Candidates are polished with
/// Newton steps and kept only when xi > 1e-12 and the scaled residual is
/// below 1e-9. An empty list is a valid result: no imaginary-axis crossing.
inline std::vector<double> positive_real_roots(double c3, double c2, double c1, double c0) {
    if (c3 <= 0.0)
        throw std::invalid_argument("positive_real_roots: leading coefficient must be > 0");
    std::vector<double> result;
    for (double root : real_cubic_roots(c3, c2, c1, c0)) {
        if (root <= 1e-12) continue;
        const double residual = std::fabs(detail::eval_cubic(c3, c2, c1, c0, root));
        const double scale = std::max(1.0, detail::cubic_scale(c3, c2, c1, c0, root));
        if (residual / scale > 1e-9) continue;
        result.push_back(root);
    }
    return result;
}

inline std::vector<double> positive_real_roots(const CubicCoefficients& c) {
    return positive_real_roots(c.c3, c.c2, c.c1, c.c0);
}

/// Delay-term value z(omega) solving the characteristic condition at
/// s = j*omega. The square-root branch is sign-selected so Im(z) <= 0, which
/// is the half-plane reachable by z = exp(-j*delta*omega) with delta >= 0.
/// At the knife-edge B = 0 the product A1*A2 is real; the principal root is
/// used, which keeps Im(z) <= 0 and therefore the smaller nonnegative delay.
inline Complex z_of_omega(const AxisDynamics& d1, const AxisDynamics& d2, double stiffness,
                          double omega) {
    if (!(stiffness > 0.0)) throw std::invalid_argument("z_of_omega: stiffness must be > 0");
    if (!(omega > 0.0)) throw std::invalid_argument("z_of_omega: omega must be > 0");
    const double m1 = d1.mass, b1 = d1.damping;
    const double m2 = d2.mass, b2 = d2.damping;
    const double k = stiffness;
    const Complex a1(m1 * omega * omega - k, -b1 * omega);
    const Complex a2(m2 * omega * omega - k, -b2 * omega);
    const double branch =
        omega * omega - k * (b1 + b2) / (m1 * b2 + m2 * b1);
    Complex z = std::sqrt(a1 * a2) / k;
    if (branch < 0.0) z = -z;
    // Guard the B = 0 tie-break: never return a value in the open upper
    // half-plane.
    if (z.imag() > 0.0) z = -z;
    return z;
}

/// One imaginary-axis crossing: the delay at which it happens and the
/// frequency where the root touches the axis.
struct DelayCrossing {
    double delay;  // s
    double omega;  // rad/s
};

/// Smallest delay at which a characteristic root reaches the imaginary axis,
/// minimised over all positive roots of F. Empty when k <= k_m (no crossing
/// exists for any delay).
inline std::optional<DelayCrossing> delay_crossing(const AxisDynamics& d1,
                                                   const AxisDynamics& d2,
                                                   double stiffness) {
    if (!(stiffness > 0.0))
        throw std::invalid_argument("delay_crossing: stiffness must be > 0");
    if (stiffness <= critical_stiffness(d1, d2)) return std::nullopt;

    const auto roots = positive_real_roots(f_xi_coefficients(d1, d2, stiffness));
    if (roots.empty())
        throw std::runtime_error(
            "delay_crossing: stiffness exceeds the critical value but no crossing "
            "frequency was found (numeric failure)");

    std::optional<DelayCrossing> best;
    for (double xi : roots) {
        const double omega = std::sqrt(xi);
        const Complex z = z_of_omega(d1, d2, stiffness, omega);
        const double delay = -std::arg(z) / omega;
        if (!std::isfinite(delay) || delay < 0.0)
            throw std::runtime_error("delay_crossing: crossing produced an invalid delay");
        if (!best || delay < best->delay) best = DelayCrossing{delay, omega};
    }
    return best;
}

/// Maximum tolerable delay for k > k_m; empty for k <= k_m.
inline std::optional<double> max_tolerable_delay(const AxisDynamics& d1,
                                                 const AxisDynamics& d2,
                                                 double stiffness) {
    const auto crossing = delay_crossing(d1, d2, stiffness);
    if (!crossing) return std::nullopt;
    return crossing->delay;
}

/// Closed form for two identical robots (m, b):
///   delay_max(k) = -m / sqrt(2 m k - b^2) * atan2(-b sqrt(2 m k - b^2)/(m k),
///                                                 (m k - b^2)/(m k))
/// Empty when k <= b^2 / (2 m).
inline std::optional<double> max_tolerable_delay_identical(const AxisDynamics& d,
                                                           double stiffness) {
    if (!(stiffness > 0.0))
        throw std::invalid_argument("max_tolerable_delay_identical: stiffness must be > 0");
    // Same boundary comparison as the general path, so k = k_m lands on the
    // delay-independent side regardless of rounding in 2mk - b^2.
    if (stiffness <= critical_stiffness(d, d)) return std::nullopt;
    const double m = d.mass, b = d.damping, k = stiffness;
    const double eta = 2.0 * m * k - b * b;
    if (eta <= 0.0) return std::nullopt;
    const double root = std::sqrt(eta);
    const double re = (m * k - b * b) / (m * k);
    const double im = -b * root / (m * k);
    return -(m / root) * std::atan2(im, re);
}

/// Per-axis verdicts plus the aggregate for a multi-DOF dyad. The aggregate
/// critical stiffness and maximum delay are the minima over axes; the
/// aggregate kind is the worst across axes.
struct ClassifyResult {
    std::map<std::string, StabilityVerdict> per_axis;
    StabilityVerdict aggregate;
};

inline ClassifyResult classify(const CouplingConfig& config) {
    ClassifyResult result;
    result.aggregate.critical_stiffness = std::numeric_limits<double>::infinity();

    std::optional<DelayCrossing> binding;
    for (const auto& [axis, d1] : config.robot1) {
        const AxisDynamics& d2 = config.robot2.at(axis);
        StabilityVerdict verdict;
        verdict.critical_stiffness = critical_stiffness(d1, d2);
        if (config.stiffness <= verdict.critical_stiffness) {
            verdict.kind = StabilityKind::DelayIndependent;
        } else {
            const auto crossing = delay_crossing(d1, d2, config.stiffness);
            verdict.max_delay = crossing->delay;
            verdict.crossing_frequency = crossing->omega;
            verdict.kind = config.delay > crossing->delay ? StabilityKind::Unstable
                                                          : StabilityKind::DelayDependent;
            if (!binding || crossing->delay < binding->delay) binding = *crossing;
        }
        if (verdict.critical_stiffness < result.aggregate.critical_stiffness)
            result.aggregate.critical_stiffness = verdict.critical_stiffness;
        if (static_cast<int>(verdict.kind) > static_cast<int>(result.aggregate.kind))
            result.aggregate.kind = verdict.kind;
        result.per_axis.emplace(axis, verdict);
    }

    if (binding) {
        result.aggregate.max_delay = binding->delay;
        result.aggregate.crossing_frequency = binding->omega;
    }
    return result;
}

}  // namespace dyadstab
