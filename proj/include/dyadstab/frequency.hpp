// Frequency-domain verification of the analytic criteria: open-loop
// response, Nyquist encirclement counting, and magnitude/phase sweeps.
//
// The open loop for one axis is
//
//   L(s) = -(k e^{-delta s})^2 / ((m1 s^2 + b1 s + k)(m2 s^2 + b2 s + k))
//
// whose poles are strictly in the left half-plane for positive damping, so
// the closed loop is stable iff the Nyquist contour of L does not encircle
// (-1, 0).
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadstab/types.hpp"

namespace dyadstab {

enum class GridSpacing { Log, Linear };

/// Strictly ascending positive frequency samples.
struct FrequencyGrid {
    std::vector<double> omegas;  // rad/s
    GridSpacing spacing = GridSpacing::Log;

    FrequencyGrid(std::vector<double> values, GridSpacing tag)
        : omegas(std::move(values)), spacing(tag) {
        if (omegas.size() < 2)
            throw std::invalid_argument("FrequencyGrid: need at least 2 points");
        double prev = 0.0;
        for (double w : omegas) {
            if (!(w > prev))
                throw std::invalid_argument(
                    "FrequencyGrid: frequencies must be positive and strictly ascending");
            prev = w;
        }
    }

    static FrequencyGrid logspace(double lo, double hi, std::size_t n) {
        if (!(lo > 0.0) || !(hi > lo) || n < 2)
            throw std::invalid_argument("FrequencyGrid::logspace: invalid range");
        std::vector<double> w(n);
        const double step = std::log(hi / lo) / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i)
            w[i] = lo * std::exp(step * static_cast<double>(i));
        w.back() = hi;
        return FrequencyGrid(std::move(w), GridSpacing::Log);
    }

    static FrequencyGrid linspace(double lo, double hi, std::size_t n) {
        if (!(lo > 0.0) || !(hi > lo) || n < 2)
            throw std::invalid_argument("FrequencyGrid::linspace: invalid range");
        std::vector<double> w(n);
        const double step = (hi - lo) / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) w[i] = lo + step * static_cast<double>(i);
        w.back() = hi;
        return FrequencyGrid(std::move(w), GridSpacing::Linear);
    }

    /// Default analysis grid: wide enough to bracket the crossing
    /// frequencies of physically plausible arm dynamics with margin.
    static FrequencyGrid standard() { return logspace(1e-2, 1e3, 4096); }
};

/// One sample of a frequency sweep. Phase is reported unwrapped and in
/// degrees; magnitude in dB.
struct FrequencyResponse {
    double omega = 0.0;
    Complex value;
    double magnitude_db = 0.0;
    double phase_deg = 0.0;
};

/// L(j*omega) for the named axis.
inline Complex open_loop_response(const CouplingConfig& config, const std::string& axis,
                                  double omega) {
    if (!(omega > 0.0))
        throw std::invalid_argument("open_loop_response: omega must be > 0");
    const AxisDynamics& d1 = config.robot1.at(axis);
    const AxisDynamics& d2 = config.robot2.at(axis);
    const double k = config.stiffness;
    const Complex p1(k - d1.mass * omega * omega, d1.damping * omega);
    const Complex p2(k - d2.mass * omega * omega, d2.damping * omega);
    const double theta = 2.0 * config.delay * omega;
    const Complex rotation(std::cos(theta), -std::sin(theta));
    return -(k * k) * rotation / (p1 * p2);
}

/// |L(j*omega)| computed from the delay-free closed form k^2 / |P1 P2|; the
/// delay term has unit modulus, so magnitude sweeps of couplings differing
/// only in delay are identical to the last bit.
inline double open_loop_magnitude(const CouplingConfig& config, const std::string& axis,
                                  double omega) {
    if (!(omega > 0.0))
        throw std::invalid_argument("open_loop_magnitude: omega must be > 0");
    const AxisDynamics& d1 = config.robot1.at(axis);
    const AxisDynamics& d2 = config.robot2.at(axis);
    const double k = config.stiffness;
    const Complex p1(k - d1.mass * omega * omega, d1.damping * omega);
    const Complex p2(k - d2.mass * omega * omega, d2.damping * omega);
    return (k * k) / std::abs(p1 * p2);
}

/// Result of the encirclement count. `winding` equals the number of
/// right-half-plane closed-loop roots (0 means stable). `min_distance` is
/// the smallest observed |L(j*omega) + 1|; values near zero flag a marginal
/// configuration that the integer count alone would hide.
struct NyquistScan {
    int winding = 0;
    double min_distance = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

inline double principal_phase_difference(double from, double to) {
    double d = std::remainder(to - from, 2.0 * M_PI);
    if (d <= -M_PI) d += 2.0 * M_PI;
    return d;
}

}  // namespace detail

/// Count encirclements of (-1, 0) by the closed Nyquist contour. The contour
/// is evaluated on the positive-frequency grid, auto-refined wherever the
/// phase of L + 1 steps by 90 degrees or more; the negative half follows by
/// conjugate symmetry and the arc at infinity contributes nothing since
/// L -> 0.
///
/// Configurations at the analytic stability boundary pass through the
/// critical point to within rounding noise, where the encirclement count is
/// genuinely undefined. Such passages (|L + 1| dipping below 1e-6) are
/// resolved to the non-crossing side -- the boundary belongs to the stable
/// region -- by replacing the phase change accumulated across the passage
/// with its modulo-pi residue. min_distance exposes the marginality that the
/// integer alone would hide.
inline NyquistScan nyquist_encirclements(const CouplingConfig& config, const std::string& axis,
                                         const FrequencyGrid& grid,
                                         std::size_t max_evaluations = 10'000'000) {
    constexpr double kPassageRadius = 1e-6;  // |L+1| below this is a boundary passage
    constexpr double kNoiseFloor = 1e-9;     // |L+1| below this is cancellation noise

    NyquistScan scan;
    scan.min_distance = std::numeric_limits<double>::infinity();

    auto offset_response = [&](double omega) {
        ++scan.evaluations;
        const Complex g = open_loop_response(config, axis, omega) + 1.0;
        const double dist = std::abs(g);
        if (dist < scan.min_distance) scan.min_distance = dist;
        return g;
    };

    const Complex first = offset_response(grid.omegas.front());
    double phase = std::arg(first);
    Complex committed = first;
    bool inside_passage = std::abs(first) < kPassageRadius;
    double passage_entry_phase = phase;
    int ambiguous_crossings = 0;

    auto commit = [&](const Complex& g) {
        const double step = detail::principal_phase_difference(std::arg(committed), std::arg(g));
        phase += step;
        const double mag = std::abs(g);
        if (!inside_passage && mag < kPassageRadius) {
            inside_passage = true;
            passage_entry_phase = phase - step;  // phase at the last outside point
        } else if (inside_passage && mag >= kPassageRadius) {
            // Remove whole pi multiples accumulated across the passage; each
            // removed multiple is a crossing whose direction rounding noise
            // decided, resolved after the sweep.
            const double raw = phase - passage_entry_phase;
            const double adjusted = std::remainder(raw, M_PI);
            phase += adjusted - raw;
            ambiguous_crossings +=
                static_cast<int>(std::lround(std::fabs(raw - adjusted) / M_PI));
            inside_passage = false;
        }
        committed = g;
    };

    // Depth-first subdivision keeps commits in ascending-omega order. A
    // segment is resolved when its principal phase step is below 90 degrees
    // AND its chord is short relative to the distance from the critical
    // point; the chord test catches undersampled segments whose phase change
    // aliases into the principal window.
    auto process = [&](auto&& self, double omega_a, const Complex& g_a, double omega_b,
                       const Complex& g_b) -> void {
        const double step =
            detail::principal_phase_difference(std::arg(g_a), std::arg(g_b));
        const double mid = 0.5 * (omega_a + omega_b);
        const bool splittable = mid > omega_a && mid < omega_b;
        const double closest = std::min(std::abs(g_a), std::abs(g_b));
        const bool in_noise = closest < kNoiseFloor;
        const bool resolved = std::fabs(step) < M_PI / 2.0 && std::abs(g_b - g_a) < closest;
        if (resolved || !splittable || in_noise) {
            commit(g_b);
            return;
        }
        if (scan.evaluations >= max_evaluations)
            throw std::runtime_error(
                "nyquist_encirclements: refinement budget exhausted near omega in [" +
                std::to_string(omega_a) + ", " + std::to_string(omega_b) + "] rad/s");
        const Complex g_mid = offset_response(mid);
        self(self, omega_a, g_a, mid, g_mid);
        self(self, mid, g_mid, omega_b, g_b);
    };

    Complex prev = first;
    double prev_omega = grid.omegas.front();
    for (std::size_t i = 1; i < grid.omegas.size(); ++i) {
        const double w = grid.omegas[i];
        const Complex g = offset_response(w);
        process(process, prev_omega, prev, w, g);
        prev = g;
        prev_omega = w;
    }

    // With the contour closed through 0+ (where L + 1 leaves the critical
    // point vertically, phase +pi/2) and infinity (phase -> 0 mod 2pi), the
    // count of right-half-plane closed-loop roots is -phase_end / pi. The
    // seed is the principal value at the first grid point, already on the
    // +pi/2 branch for any grid starting below the first resonance.
    const int base = static_cast<int>(std::lround(-phase / M_PI));
    int winding = base;
    if (ambiguous_crossings > 0) {
        // Each boundary passage shifts the count by +-1; take the candidate
        // of smallest magnitude (nonnegative on ties), i.e. the stable side.
        winding = base - ambiguous_crossings;
        for (int s = -ambiguous_crossings; s <= ambiguous_crossings; s += 2) {
            const int candidate = base + s;
            if (std::abs(candidate) < std::abs(winding) ||
                (std::abs(candidate) == std::abs(winding) && candidate > winding))
                winding = candidate;
        }
    }
    scan.winding = winding;
    return scan;
}

/// Magnitude/phase sweep of L(j*omega) over the grid. Phase is unwrapped so
/// adjacent samples differ by less than 180 degrees.
inline std::vector<FrequencyResponse> sweep_response(const CouplingConfig& config,
                                                     const std::string& axis,
                                                     const FrequencyGrid& grid) {
    std::vector<FrequencyResponse> sweep;
    sweep.reserve(grid.omegas.size());
    double unwrapped = 0.0;
    bool first = true;
    for (double w : grid.omegas) {
        FrequencyResponse point;
        point.omega = w;
        point.value = open_loop_response(config, axis, w);
        point.magnitude_db = 20.0 * std::log10(open_loop_magnitude(config, axis, w));
        const double raw = std::arg(point.value);
        if (first) {
            unwrapped = raw;
            first = false;
        } else {
            unwrapped += detail::principal_phase_difference(unwrapped, raw);
        }
        point.phase_deg = unwrapped * (180.0 / M_PI);
        sweep.push_back(point);
    }
    return sweep;
}

}  // namespace dyadstab
