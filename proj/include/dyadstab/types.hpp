// Value types shared across the library: per-axis robot dynamics, the dyad
// coupling description, and stability verdicts.
#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dyadstab {

using Complex = std::complex<double>;

/// Estimated rigid-body dynamics of one robot along one Cartesian axis.
/// Both parameters must be strictly positive: an undamped axis has an empty
/// delay-independent region and degenerates the branch selection in the
/// crossing analysis, so it is rejected here rather than downstream.
struct AxisDynamics {
    double mass;     // kg
    double damping;  // N*s/m

    AxisDynamics(double mass_kg, double damping_ns_per_m)
        : mass(mass_kg), damping(damping_ns_per_m) {
        if (!std::isfinite(mass) || mass <= 0.0)
            throw std::invalid_argument("AxisDynamics: mass must be finite and > 0");
        if (!std::isfinite(damping) || damping <= 0.0)
            throw std::invalid_argument("AxisDynamics: damping must be finite and > 0");
    }
};

using AxisMap = std::map<std::string, AxisDynamics>;

/// Full description of a coupled dyad: both robots' per-axis dynamics plus
/// the virtual-spring stiffness and the one-way transmission delay.
struct CouplingConfig {
    AxisMap robot1;
    AxisMap robot2;
    double stiffness;  // N/m
    double delay;      // s

    CouplingConfig(AxisMap r1, AxisMap r2, double stiffness_n_per_m, double delay_s)
        : robot1(std::move(r1)), robot2(std::move(r2)),
          stiffness(stiffness_n_per_m), delay(delay_s) {
        if (robot1.empty())
            throw std::invalid_argument("CouplingConfig: axis set must be non-empty");
        if (robot1.size() != robot2.size())
            throw std::invalid_argument("CouplingConfig: robots must share the same axes");
        for (const auto& [axis, dyn] : robot1) {
            (void)dyn;
            if (robot2.find(axis) == robot2.end())
                throw std::invalid_argument("CouplingConfig: axis '" + axis +
                                            "' missing on robot2");
        }
        if (!std::isfinite(stiffness) || stiffness <= 0.0)
            throw std::invalid_argument("CouplingConfig: stiffness must be finite and > 0");
        if (!std::isfinite(delay) || delay < 0.0)
            throw std::invalid_argument("CouplingConfig: delay must be finite and >= 0");
    }

    std::vector<std::string> axes() const {
        std::vector<std::string> names;
        names.reserve(robot1.size());
        for (const auto& [axis, dyn] : robot1) {
            (void)dyn;
            names.push_back(axis);
        }
        return names;
    }
};

enum class StabilityKind { DelayIndependent, DelayDependent, Unstable };

inline const char* to_string(StabilityKind kind) {
    switch (kind) {
        case StabilityKind::DelayIndependent: return "delay-independent";
        case StabilityKind::DelayDependent: return "delay-dependent";
        case StabilityKind::Unstable: return "unstable";
    }
    return "?";
}

/// Stability classification of one axis (or of the aggregated dyad).
/// max_delay and crossing_frequency are present exactly when the configured
/// stiffness exceeds the critical stiffness.
struct StabilityVerdict {
    StabilityKind kind = StabilityKind::DelayIndependent;
    double critical_stiffness = 0.0;            // N/m
    std::optional<double> max_delay;            // s
    std::optional<double> crossing_frequency;   // rad/s

    std::string describe() const {
        std::ostringstream out;
        out << to_string(kind) << " (k_m=" << critical_stiffness;
        if (max_delay) out << ", delay_max=" << *max_delay << " s";
        if (crossing_frequency) out << ", omega=" << *crossing_frequency << " rad/s";
        out << ")";
        return out.str();
    }
};

}  // namespace dyadstab
