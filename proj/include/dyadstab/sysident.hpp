// Per-axis inertia/damping identification: Fourier velocity excitation,
// synthetic force measurement, and ordinary / iteratively reweighted least
// squares on the regression F = [xdd, xd] [m, b]^T.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dyadstab/rng.hpp"
#include "dyadstab/types.hpp"

namespace dyadstab {

/// Multi-harmonic velocity command
///   v(t) = sum_i A_i cos(i w t) + B_i sin(i w t).
struct ExcitationProfile {
    std::vector<double> cosine_amps;  // m/s
    std::vector<double> sine_amps;    // m/s
    double omega;                     // rad/s, fundamental

    ExcitationProfile(std::vector<double> a, std::vector<double> b, double fundamental)
        : cosine_amps(std::move(a)), sine_amps(std::move(b)), omega(fundamental) {
        if (cosine_amps.empty() || cosine_amps.size() != sine_amps.size())
            throw std::invalid_argument(
                "ExcitationProfile: amplitude vectors must be non-empty and equal length");
        if (!(omega > 0.0))
            throw std::invalid_argument("ExcitationProfile: omega must be > 0");
    }

    /// Amplitudes reported alongside the identification appendix: five
    /// harmonics, identical cosine and sine weights.
    static ExcitationProfile reference(double fundamental = 1.0) {
        return ExcitationProfile({0.01, 0.02, 0.05, 0.1, 0.15},
                                 {0.01, 0.02, 0.05, 0.1, 0.15}, fundamental);
    }
};

/// Uniformly sampled kinematics (and optionally force) of one axis.
struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> acceleration;
    std::vector<double> force;  // empty until a measurement fills it

    void validate() const {
        const std::size_t n = times.size();
        if (n < 2) throw std::invalid_argument("TrajectoryRecord: need at least 2 samples");
        if (position.size() != n || velocity.size() != n || acceleration.size() != n)
            throw std::invalid_argument("TrajectoryRecord: series lengths differ");
        if (!force.empty() && force.size() != n)
            throw std::invalid_argument("TrajectoryRecord: force length differs");
        const double dt = times[1] - times[0];
        for (std::size_t i = 1; i < n; ++i) {
            if (std::fabs((times[i] - times[i - 1]) - dt) > 1e-9)
                throw std::invalid_argument("TrajectoryRecord: sampling must be uniform");
        }
    }
};

struct IdentificationResult {
    double mass_hat = 0.0;      // kg
    double damping_hat = 0.0;   // N*s/m
    double residual_rms = 0.0;  // N
    int iterations = 0;
    bool converged = false;
};

/// Sample the excitation kinematics. Velocity follows the series exactly;
/// position and acceleration come from term-wise integration and
/// differentiation, with the integration constant chosen so x(0) = 0.
inline TrajectoryRecord generate_excitation(const ExcitationProfile& profile, double duration,
                                            double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("generate_excitation: dt must be > 0");
    const double period = 2.0 * M_PI / profile.omega;
    if (duration < period)
        throw std::invalid_argument(
            "generate_excitation: duration must cover one fundamental period");

    const std::size_t n = static_cast<std::size_t>(std::floor(duration / dt)) + 1;
    TrajectoryRecord record;
    record.times.resize(n);
    record.position.resize(n);
    record.velocity.resize(n);
    record.acceleration.resize(n);

    const std::size_t harmonics = profile.cosine_amps.size();
    for (std::size_t s = 0; s < n; ++s) {
        const double t = static_cast<double>(s) * dt;
        double x = 0.0, v = 0.0, a = 0.0;
        for (std::size_t i = 0; i < harmonics; ++i) {
            const double w = profile.omega * static_cast<double>(i + 1);
            const double ca = profile.cosine_amps[i];
            const double sa = profile.sine_amps[i];
            const double cwt = std::cos(w * t);
            const double swt = std::sin(w * t);
            v += ca * cwt + sa * swt;
            x += (ca * swt + sa * (1.0 - cwt)) / w;
            a += (-ca * swt + sa * cwt) * w;
        }
        record.times[s] = t;
        record.position[s] = x;
        record.velocity[s] = v;
        record.acceleration[s] = a;
    }
    return record;
}

/// Synthesize the force a robot with the given dynamics would require to
/// follow the kinematics, plus Gaussian measurement noise. Reproducible for
/// a given seed.
inline TrajectoryRecord simulate_measurement(const AxisDynamics& dynamics,
                                             const TrajectoryRecord& kinematics,
                                             double noise_std, std::uint64_t seed) {
    kinematics.validate();
    if (!(noise_std >= 0.0))
        throw std::invalid_argument("simulate_measurement: noise_std must be >= 0");
    TrajectoryRecord record = kinematics;
    record.force.resize(record.times.size());
    Rng rng(seed);
    for (std::size_t i = 0; i < record.times.size(); ++i) {
        double f = dynamics.mass * record.acceleration[i] +
                   dynamics.damping * record.velocity[i];
        if (noise_std > 0.0) f += rng.gaussian(0.0, noise_std);
        record.force[i] = f;
    }
    return record;
}

namespace detail {

inline Eigen::MatrixXd regressor_matrix(const TrajectoryRecord& record) {
    const auto n = static_cast<Eigen::Index>(record.times.size());
    Eigen::MatrixXd x(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = record.acceleration[static_cast<std::size_t>(i)];
        x(i, 1) = record.velocity[static_cast<std::size_t>(i)];
    }
    return x;
}

inline void require_full_rank(const Eigen::MatrixXd& x) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < 2)
        throw std::runtime_error(
            "estimate: regressor matrix is rank-deficient (acceleration and velocity "
            "columns are linearly dependent; the trajectory does not excite both "
            "parameters)");
}

}  // namespace detail

/// Ordinary least squares via Householder QR.
inline IdentificationResult estimate_ols(const TrajectoryRecord& record) {
    record.validate();
    if (record.force.empty())
        throw std::invalid_argument("estimate_ols: record has no force data");

    const Eigen::MatrixXd x = detail::regressor_matrix(record);
    detail::require_full_rank(x);
    const Eigen::Map<const Eigen::VectorXd> f(record.force.data(),
                                              static_cast<Eigen::Index>(record.force.size()));
    const Eigen::Vector2d beta = x.colPivHouseholderQr().solve(f);

    IdentificationResult result;
    result.mass_hat = beta(0);
    result.damping_hat = beta(1);
    result.residual_rms =
        std::sqrt((f - x * beta).squaredNorm() / static_cast<double>(f.size()));
    result.iterations = 0;
    result.converged = true;
    return result;
}

/// Iteratively reweighted least squares with weights 1 / (r^2 + eps),
/// started from the ordinary solution. eps is a machine-precision floor
/// scaled by the squared force magnitude so the weights stay finite and
/// dimensionally consistent.
inline IdentificationResult estimate_wls(const TrajectoryRecord& record, int max_iter = 50,
                                         double tol = 1e-10) {
    record.validate();
    if (record.force.empty())
        throw std::invalid_argument("estimate_wls: record has no force data");
    if (max_iter < 1) throw std::invalid_argument("estimate_wls: max_iter must be >= 1");

    const Eigen::MatrixXd x = detail::regressor_matrix(record);
    detail::require_full_rank(x);
    const Eigen::Map<const Eigen::VectorXd> f(record.force.data(),
                                              static_cast<Eigen::Index>(record.force.size()));

    const double force_rms = std::sqrt(f.squaredNorm() / static_cast<double>(f.size()));
    const double scale = std::max(1.0, force_rms);
    const double eps = std::numeric_limits<double>::epsilon() * scale * scale;

    Eigen::Vector2d beta = x.colPivHouseholderQr().solve(f);
    IdentificationResult result;
    for (int it = 1; it <= max_iter; ++it) {
        const Eigen::VectorXd residual = f - x * beta;
        const Eigen::ArrayXd sqrt_w =
            (residual.array().square() + eps).inverse().sqrt();
        const Eigen::MatrixXd xw = x.array().colwise() * sqrt_w;
        const Eigen::VectorXd fw = f.array() * sqrt_w;
        const Eigen::Vector2d next = xw.colPivHouseholderQr().solve(fw);
        const double change = (next - beta).norm() / std::max(beta.norm(), 1e-300);
        beta = next;
        result.iterations = it;
        if (change < tol) {
            result.converged = true;
            break;
        }
    }
    result.mass_hat = beta(0);
    result.damping_hat = beta(1);
    result.residual_rms =
        std::sqrt((f - x * beta).squaredNorm() / static_cast<double>(f.size()));
    return result;
}

}  // namespace dyadstab
