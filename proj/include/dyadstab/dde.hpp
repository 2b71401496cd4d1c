// Time-domain integration of the delayed-coupling dynamics with constant
// delay (method of steps: classical fixed-step 4th-order Runge-Kutta with
// cubic Hermite interpolation of the history buffer), plus window-based
// stable/marginal/unstable classification of the response.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadstab/types.hpp"

namespace dyadstab {

/// Coupling parameters of one axis as seen by the integrator. Unlike
/// CouplingConfig this allows stiffness = 0 (an uncoupled pair), which the
/// experiment module uses for its unconnected baseline.
struct AxisCouplingParams {
    double m1, b1;
    double m2, b2;
    double stiffness;  // N/m, >= 0
    double delay;      // s, >= 0

    AxisCouplingParams(const AxisDynamics& d1, const AxisDynamics& d2, double k, double delta)
        : m1(d1.mass), b1(d1.damping), m2(d2.mass), b2(d2.damping),
          stiffness(k), delay(delta) {
        if (!std::isfinite(k) || k < 0.0)
            throw std::invalid_argument("AxisCouplingParams: stiffness must be >= 0");
        if (!std::isfinite(delta) || delta < 0.0)
            throw std::invalid_argument("AxisCouplingParams: delay must be >= 0");
    }
};

/// Integrates one axis of the dyad. Robots start from rest with identically
/// zero history for t <= 0. State samples (t, x, x', x'') are kept for the
/// delayed terms and for output.
class AxisDdeIntegrator {
public:
    struct Sample {
        double t;
        double x1, v1, a1;
        double x2, v2, a2;
    };

    AxisDdeIntegrator(const AxisCouplingParams& params, double dt)
        : p_(params), dt_(dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("AxisDdeIntegrator: dt must be > 0");
        if (p_.delay > 0.0 && dt > p_.delay / 10.0 + 1e-15)
            throw std::invalid_argument("AxisDdeIntegrator: dt must not exceed delay/10");
        if (p_.delay == 0.0 && dt > 1e-3 + 1e-15)
            throw std::invalid_argument(
                "AxisDdeIntegrator: dt must not exceed 1e-3 s for the delay-free case");
        history_.push_back(Sample{0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
    }

    double time() const { return history_.back().t; }
    double x1() const { return history_.back().x1; }
    double v1() const { return history_.back().v1; }
    double x2() const { return history_.back().x2; }
    double v2() const { return history_.back().v2; }
    bool diverged() const { return diverged_; }
    const std::vector<Sample>& history() const { return history_; }

    /// Advance one step with the given force signals (functions of time).
    /// Returns false when the divergence guard fired; the state is then left
    /// at the last finite sample.
    template <typename F1, typename F2>
    bool step(F1&& force1, F2&& force2) {
        if (diverged_) return false;
        const Sample& s = history_.back();
        const double t = s.t;
        const double h = dt_;

        double y[4] = {s.x1, s.v1, s.x2, s.v2};
        double k1[4], k2[4], k3[4], k4[4], tmp[4];

        derivative(t, y, force1, force2, k1);
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        derivative(t + 0.5 * h, tmp, force1, force2, k2);
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        derivative(t + 0.5 * h, tmp, force1, force2, k3);
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + h * k3[i];
        derivative(t + h, tmp, force1, force2, k4);

        Sample next;
        next.t = t + h;
        next.x1 = y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        next.v1 = y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        next.x2 = y[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
        next.v2 = y[3] + h / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]);

        constexpr double kDivergenceLimit = 1e6;  // m
        const bool finite = std::isfinite(next.x1) && std::isfinite(next.v1) &&
                            std::isfinite(next.x2) && std::isfinite(next.v2);
        if (!finite || std::fabs(next.x1) > kDivergenceLimit ||
            std::fabs(next.x2) > kDivergenceLimit) {
            diverged_ = true;
            return false;
        }

        double ynext[4] = {next.x1, next.v1, next.x2, next.v2};
        double anext[4];
        derivative(next.t, ynext, force1, force2, anext);
        next.a1 = anext[1];
        next.a2 = anext[3];
        history_.push_back(next);
        return true;
    }

private:
    template <typename F1, typename F2>
    void derivative(double t, const double y[4], F1&& force1, F2&& force2,
                    double out[4]) const {
        double x2_delayed, x1_delayed;
        if (p_.delay == 0.0) {
            // Delay-free coupling closes through the stage values.
            x2_delayed = y[2];
            x1_delayed = y[0];
        } else {
            x1_delayed = delayed_position(t - p_.delay, /*robot=*/1);
            x2_delayed = delayed_position(t - p_.delay, /*robot=*/2);
        }
        out[0] = y[1];
        out[1] = (p_.stiffness * (x2_delayed - y[0]) - p_.b1 * y[1] + force1(t)) / p_.m1;
        out[2] = y[3];
        out[3] = (p_.stiffness * (x1_delayed - y[2]) - p_.b2 * y[3] + force2(t)) / p_.m2;
    }

    /// Cubic Hermite interpolation of a robot's position at tau <= current
    /// time; identically zero before the start of the simulation.
    double delayed_position(double tau, int robot) const {
        if (tau <= 0.0) return 0.0;
        // Uniform step: locate the bracketing samples directly.
        std::size_t idx = static_cast<std::size_t>(tau / dt_);
        if (idx + 1 >= history_.size()) idx = history_.size() - 2;
        while (idx > 0 && history_[idx].t > tau) --idx;
        while (idx + 2 < history_.size() && history_[idx + 1].t < tau) ++idx;
        const Sample& s0 = history_[idx];
        const Sample& s1 = history_[idx + 1];
        const double h = s1.t - s0.t;
        const double theta = (tau - s0.t) / h;
        const double t2 = theta * theta;
        const double t3 = t2 * theta;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + theta;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        if (robot == 1)
            return h00 * s0.x1 + h10 * h * s0.v1 + h01 * s1.x1 + h11 * h * s1.v1;
        return h00 * s0.x2 + h10 * h * s0.v2 + h01 * s1.x2 + h11 * h * s1.v2;
    }

    AxisCouplingParams p_;
    double dt_;
    std::vector<Sample> history_;
    bool diverged_ = false;
};

enum class ResponseLabel { Stable, Marginal, Unstable };

inline const char* to_string(ResponseLabel label) {
    switch (label) {
        case ResponseLabel::Stable: return "stable";
        case ResponseLabel::Marginal: return "marginal";
        case ResponseLabel::Unstable: return "unstable";
    }
    return "?";
}

/// Position series of both robots along one axis.
struct AxisSeries {
    std::vector<double> x1;
    std::vector<double> x2;
};

/// Simulation output: a shared time base, per-axis position series, and
/// (after classification) per-axis labels with the growth ratio that
/// justified them. `truncated` marks runs cut short by the divergence guard.
struct StepResponse {
    std::vector<double> times;
    std::map<std::string, AxisSeries> axes;
    std::map<std::string, ResponseLabel> classification;
    std::map<std::string, double> growth_ratio;
    std::vector<std::string> diverged_axes;
    bool truncated = false;
};

/// Force signals applied to the two robots along one axis.
struct AxisForces {
    std::function<double(double)> on_robot1;
    std::function<double(double)> on_robot2;
};

inline std::map<std::string, AxisForces> constant_opposite_forces(
    const CouplingConfig& config, double magnitude = 1.0) {
    std::map<std::string, AxisForces> forces;
    for (const auto& axis : config.axes()) {
        forces.emplace(axis, AxisForces{[magnitude](double) { return magnitude; },
                                        [magnitude](double) { return -magnitude; }});
    }
    return forces;
}

/// Integrate every axis of the dyad from rest. Axes are mutually independent
/// and share the time base; if any axis trips the divergence guard, all
/// series are truncated at the last commonly finite sample so the series
/// lengths stay consistent.
inline StepResponse integrate(const CouplingConfig& config,
                              const std::map<std::string, AxisForces>& forces,
                              double t_end, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
    if (config.delay > 0.0 && dt > config.delay / 10.0 + 1e-15)
        throw std::invalid_argument("integrate: dt must not exceed delay/10");
    if (config.delay == 0.0 && dt > 1e-3 + 1e-15)
        throw std::invalid_argument("integrate: dt must not exceed 1e-3 s when delay = 0");
    if (!(t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be > 0");

    const std::size_t steps = static_cast<std::size_t>(std::llround(t_end / dt));

    std::vector<std::string> names = config.axes();
    std::vector<AxisDdeIntegrator> integrators;
    integrators.reserve(names.size());
    for (const auto& axis : names) {
        integrators.emplace_back(
            AxisCouplingParams(config.robot1.at(axis), config.robot2.at(axis),
                               config.stiffness, config.delay),
            dt);
    }

    StepResponse response;
    std::size_t committed = steps;
    for (std::size_t a = 0; a < names.size(); ++a) {
        const AxisForces& f = forces.at(names[a]);
        auto& integ = integrators[a];
        for (std::size_t i = 0; i < steps; ++i) {
            if (!integ.step(f.on_robot1, f.on_robot2)) {
                response.truncated = true;
                break;
            }
        }
        committed = std::min(committed, integ.history().size() - 1);
    }

    response.times.resize(committed + 1);
    for (std::size_t i = 0; i <= committed; ++i)
        response.times[i] = integrators.front().history()[i].t;
    for (std::size_t a = 0; a < names.size(); ++a) {
        AxisSeries series;
        series.x1.resize(committed + 1);
        series.x2.resize(committed + 1);
        const auto& hist = integrators[a].history();
        for (std::size_t i = 0; i <= committed; ++i) {
            series.x1[i] = hist[i].x1;
            series.x2[i] = hist[i].x2;
        }
        response.axes.emplace(names[a], std::move(series));
        if (integrators[a].diverged()) response.diverged_axes.push_back(names[a]);
    }
    return response;
}

namespace detail {

/// Peak-to-peak amplitude of the deviation from `center` over [begin, end).
inline double window_amplitude(const std::vector<double>& x1, const std::vector<double>& x2,
                               std::size_t begin, std::size_t end, double c1, double c2) {
    double lo1 = std::numeric_limits<double>::infinity(), hi1 = -lo1;
    double lo2 = lo1, hi2 = -lo1;
    for (std::size_t i = begin; i < end; ++i) {
        const double d1 = x1[i] - c1;
        const double d2 = x2[i] - c2;
        lo1 = std::min(lo1, d1);
        hi1 = std::max(hi1, d1);
        lo2 = std::min(lo2, d2);
        hi2 = std::max(hi2, d2);
    }
    return std::max(hi1 - lo1, hi2 - lo2);
}

}  // namespace detail

/// Per-axis label plus the amplitude growth ratio it was derived from.
struct AxisClassification {
    ResponseLabel label = ResponseLabel::Stable;
    double growth_ratio = 0.0;
};

/// Compare peak-to-peak amplitudes (deviation from the final-window mean)
/// across the last two settle windows: ratio < 0.95 or amplitude below an
/// absolute floor of 1e-9 m reads stable, ratio > 1.05 unstable, anything
/// between marginal. Diverged axes are unstable outright; a truncated run
/// whose remaining series is too short for window analysis falls back to a
/// first-third / last-third amplitude comparison.
inline std::map<std::string, AxisClassification> classify_response(
    const StepResponse& response, double settle_window) {
    if (!(settle_window > 0.0))
        throw std::invalid_argument("classify_response: settle_window must be > 0");
    if (response.times.size() < 2)
        throw std::invalid_argument("classify_response: series too short");

    constexpr double kAmplitudeFloor = 1e-9;        // m
    constexpr double kStableRatio = 0.95;
    constexpr double kUnstableRatio = 1.05;

    const double dt = response.times[1] - response.times[0];
    const double span = response.times.back() - response.times.front();
    const std::size_t n = response.times.size();
    const std::size_t per_window = static_cast<std::size_t>(std::llround(settle_window / dt));

    std::map<std::string, AxisClassification> labels;
    for (const auto& [axis, series] : response.axes) {
        AxisClassification out;
        const bool diverged =
            std::find(response.diverged_axes.begin(), response.diverged_axes.end(), axis) !=
            response.diverged_axes.end();
        if (diverged) {
            out.label = ResponseLabel::Unstable;
            out.growth_ratio = std::numeric_limits<double>::infinity();
            labels.emplace(axis, out);
            continue;
        }
        if (span < 3.0 * settle_window || per_window < 2) {
            if (!response.truncated)
                throw std::invalid_argument(
                    "classify_response: series must cover at least 3 settle windows");
            // Truncated by another axis diverging: fall back to coarse
            // growth detection over what remains.
            const std::size_t third = std::max<std::size_t>(2, n / 3);
            const double head =
                detail::window_amplitude(series.x1, series.x2, 0, third, 0.0, 0.0);
            const double tail =
                detail::window_amplitude(series.x1, series.x2, n - third, n, 0.0, 0.0);
            out.growth_ratio = head > 0.0 ? tail / head : 0.0;
            out.label = out.growth_ratio > kUnstableRatio ? ResponseLabel::Unstable
                        : out.growth_ratio < kStableRatio ? ResponseLabel::Stable
                                                          : ResponseLabel::Marginal;
            labels.emplace(axis, out);
            continue;
        }

        const std::size_t last_begin = n - per_window;
        const std::size_t prev_begin = n - 2 * per_window;
        double mean1 = 0.0, mean2 = 0.0;
        for (std::size_t i = last_begin; i < n; ++i) {
            mean1 += series.x1[i];
            mean2 += series.x2[i];
        }
        mean1 /= static_cast<double>(per_window);
        mean2 /= static_cast<double>(per_window);

        const double last =
            detail::window_amplitude(series.x1, series.x2, last_begin, n, mean1, mean2);
        const double prev = detail::window_amplitude(series.x1, series.x2, prev_begin,
                                                     last_begin, mean1, mean2);
        out.growth_ratio = prev > 0.0 ? last / prev : 0.0;
        if (last < kAmplitudeFloor || out.growth_ratio < kStableRatio) {
            out.label = ResponseLabel::Stable;
        } else if (out.growth_ratio > kUnstableRatio) {
            out.label = ResponseLabel::Unstable;
        } else {
            out.label = ResponseLabel::Marginal;
        }
        labels.emplace(axis, out);
    }
    return labels;
}

/// Convenience wrapper: integrate under opposing unit forces and classify.
/// This is the configuration used to probe stability of a coupling in the
/// time domain.
inline StepResponse simulate_step_and_classify(const CouplingConfig& config, double t_end,
                                               double dt, double settle_window) {
    StepResponse response = integrate(config, constant_opposite_forces(config), t_end, dt);
    auto labels = classify_response(response, settle_window);
    for (const auto& [axis, cls] : labels) {
        response.classification[axis] = cls.label;
        response.growth_ratio[axis] = cls.growth_ratio;
    }
    return response;
}

/// Default integration step: fine enough for order-4 accuracy at the delays
/// and crossing frequencies of interest.
inline double default_dt(double delay) {
    return delay > 0.0 ? std::min(delay / 20.0, 1e-3) : 1e-3;
}

}  // namespace dyadstab
