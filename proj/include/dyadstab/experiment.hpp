// Simulated reproduction of the dyadic tracking experiment: a figure-eight
// target, a skilled agent and a disturbance-degraded agent driving the two
// robots, delayed virtual-spring coupling between them, tracking-error
// metrics, and the condition grid with rank-sum comparisons against the
// unconnected baseline.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dyadstab/dde.hpp"
#include "dyadstab/parallel.hpp"
#include "dyadstab/ranksum.hpp"
#include "dyadstab/rng.hpp"
#include "dyadstab/types.hpp"

namespace dyadstab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
};

/// Figure-eight target p*(t) = [A sin(2 w t), B sin(w t)].
struct TargetSpec {
    double amp_x;  // m
    double amp_y;  // m
    double omega;  // rad/s

    TargetSpec(double a, double b, double w) : amp_x(a), amp_y(b), omega(w) {
        if (!(amp_x > 0.0) || !(amp_y > 0.0) || !(omega > 0.0))
            throw std::invalid_argument("TargetSpec: amplitudes and omega must be > 0");
    }

    double period() const { return 2.0 * M_PI / omega; }

    /// Reference trajectory parameters of the tracking task.
    static TargetSpec reference() { return TargetSpec(0.05, 0.1, 2.59); }
};

inline Vec2 nominal_target(const TargetSpec& spec, double t) {
    if (t < 0.0) throw std::invalid_argument("nominal_target: t must be >= 0");
    return {spec.amp_x * std::sin(2.0 * spec.omega * t), spec.amp_y * std::sin(spec.omega * t)};
}

enum class AgentKind { Skilled, Blurred };

/// Human-like agent acting on one robot. A skilled agent pulls toward the
/// nominal target with stiffness k_c; a blurred agent pulls toward each of N
/// target spots with stiffness k_c / N, the spots wandering with random
/// per-tick velocities to emulate the degraded percept.
struct AgentSpec {
    AgentKind kind;
    double coupling_stiffness;      // N/m, k_c
    int spot_count = 0;             // blurred only
    double spot_velocity_std = 0.0; // m/s, blurred only

    static AgentSpec skilled(double k_c) {
        if (!(k_c > 0.0)) throw std::invalid_argument("AgentSpec: k_c must be > 0");
        AgentSpec spec{AgentKind::Skilled, k_c};
        return spec;
    }

    static AgentSpec blurred(double k_c, int spots, double velocity_std) {
        if (!(k_c > 0.0)) throw std::invalid_argument("AgentSpec: k_c must be > 0");
        if (spots < 1) throw std::invalid_argument("AgentSpec: spot count must be >= 1");
        if (!(velocity_std >= 0.0))
            throw std::invalid_argument("AgentSpec: velocity std must be >= 0");
        AgentSpec spec{AgentKind::Blurred, k_c, spots, velocity_std};
        return spec;
    }

    /// Stream fingerprint: identical specs get identical disturbance
    /// sequences for a given trial seed, which makes symmetric dyads produce
    /// exactly symmetric outcomes.
    std::uint64_t fingerprint() const {
        std::uint64_t h = kind == AgentKind::Skilled ? 0x5345ULL : 0x424cULL;
        auto mix = [&h](std::uint64_t v) {
            h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        };
        std::uint64_t bits;
        static_assert(sizeof(double) == sizeof(std::uint64_t));
        std::memcpy(&bits, &coupling_stiffness, sizeof(bits));
        mix(bits);
        mix(static_cast<std::uint64_t>(spot_count));
        std::memcpy(&bits, &spot_velocity_std, sizeof(bits));
        mix(bits);
        return h;
    }
};

/// The wandering point cloud a blurred agent perceives. Each spot carries an
/// offset from the nominal target; every tick the spot velocity is resampled
/// from N(0, sigma^2) per component and the offset advanced, clamped to a
/// disc so the disturbance stays stationary instead of drifting without
/// bound.
class SpotCloud {
public:
    static constexpr double kClampRadius = 0.05;  // m

    SpotCloud(int count, double velocity_std)
        : sigma_(velocity_std), offsets_(static_cast<std::size_t>(count)),
          velocities_(static_cast<std::size_t>(count)) {
        if (count < 1) throw std::invalid_argument("SpotCloud: need at least one spot");
    }

    void step(Rng& rng, double dt) {
        for (std::size_t i = 0; i < offsets_.size(); ++i) {
            velocities_[i] = {rng.gaussian(0.0, sigma_), rng.gaussian(0.0, sigma_)};
            Vec2 moved = offsets_[i] + velocities_[i] * dt;
            const double r = moved.norm();
            if (r > kClampRadius) moved = moved * (kClampRadius / r);
            offsets_[i] = moved;
        }
    }

    std::vector<Vec2> positions(const Vec2& nominal) const {
        std::vector<Vec2> spots(offsets_.size());
        for (std::size_t i = 0; i < spots.size(); ++i) spots[i] = nominal + offsets_[i];
        return spots;
    }

    Vec2 mean_velocity() const {
        Vec2 sum;
        for (const Vec2& v : velocities_) sum = sum + v;
        return sum * (1.0 / static_cast<double>(velocities_.size()));
    }

    Vec2 mean_offset() const {
        Vec2 sum;
        for (const Vec2& o : offsets_) sum = sum + o;
        return sum * (1.0 / static_cast<double>(offsets_.size()));
    }

private:
    double sigma_;
    std::vector<Vec2> offsets_;
    std::vector<Vec2> velocities_;
};

/// Force an agent exerts on its robot. Skilled: k_c (p* - p). Blurred:
/// sum_i (k_c / N)(spot_i - p), which by linearity equals k_c applied at the
/// spot centroid.
inline Vec2 agent_force(const AgentSpec& spec, const Vec2& nominal,
                        std::span<const Vec2> spots, const Vec2& current) {
    if (spec.kind == AgentKind::Skilled) {
        if (!spots.empty())
            throw std::invalid_argument("agent_force: skilled agents take no spots");
        return (nominal - current) * spec.coupling_stiffness;
    }
    if (spots.empty()) throw std::invalid_argument("agent_force: blurred agents need spots");
    Vec2 total;
    const double per_spot = spec.coupling_stiffness / static_cast<double>(spots.size());
    for (const Vec2& spot : spots) total = total + (spot - current) * per_spot;
    return total;
}

enum class ExperimentMode { Unconnected, Connected };

struct ExperimentCondition {
    ExperimentMode mode = ExperimentMode::Unconnected;
    double stiffness = 0.0;  // N/m, used in Connected mode
    double delay = 0.0;      // s
    int trials = 20;
    std::string label;

    static ExperimentCondition unconnected(int trials, std::string name = "UM") {
        ExperimentCondition c;
        c.mode = ExperimentMode::Unconnected;
        c.trials = trials;
        c.label = std::move(name);
        c.validate();
        return c;
    }

    static ExperimentCondition connected(double stiffness, double delay, int trials,
                                         std::string name = "") {
        ExperimentCondition c;
        c.mode = ExperimentMode::Connected;
        c.stiffness = stiffness;
        c.delay = delay;
        c.trials = trials;
        if (name.empty()) {
            std::ostringstream label;
            label << "CM-" << std::lround(stiffness) << "-" << std::lround(delay * 1e3);
            name = label.str();
        }
        c.label = std::move(name);
        c.validate();
        return c;
    }

    void validate() const {
        if (trials < 1) throw std::invalid_argument("ExperimentCondition: trials must be >= 1");
        if (mode == ExperimentMode::Connected && !(stiffness > 0.0))
            throw std::invalid_argument(
                "ExperimentCondition: connected mode needs stiffness > 0");
        if (!(delay >= 0.0))
            throw std::invalid_argument("ExperimentCondition: delay must be >= 0");
    }
};

/// Per-trial sampled 2-D trajectory.
struct PlanarTrajectory {
    std::vector<double> times;
    std::vector<Vec2> robot1;
    std::vector<Vec2> robot2;
    std::vector<Vec2> target;
};

struct TrialResult {
    double te1 = 0.0;  // m
    double te2 = 0.0;  // m
    std::optional<PlanarTrajectory> trajectory;
};

struct TrialOptions {
    int periods = 8;             // total trial length in target periods
    int discard_periods = 1;     // startup transient excluded from TE
    double control_dt = 0.01;    // s, agent force / spot update tick
    bool keep_trajectory = false;
};

/// Mean Euclidean distance between two aligned trajectories.
inline double tracking_error(std::span<const Vec2> actual, std::span<const Vec2> target) {
    if (actual.size() != target.size())
        throw std::invalid_argument("tracking_error: trajectory lengths differ");
    if (actual.empty()) throw std::invalid_argument("tracking_error: empty trajectories");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) sum += (actual[i] - target[i]).norm();
    return sum / static_cast<double>(actual.size());
}

/// Run one tracking trial: both robots follow their agents' force laws while
/// (in connected mode) a delayed virtual spring couples them. Agent forces
/// are held constant between control ticks; the physics advances at the
/// integrator step inside each tick.
inline TrialResult run_trial(const CouplingConfig& robots,
                             const std::pair<AgentSpec, AgentSpec>& agents,
                             const TargetSpec& target, const ExperimentCondition& condition,
                             std::uint64_t seed, const TrialOptions& options = {}) {
    condition.validate();
    if (robots.robot1.find("x") == robots.robot1.end() ||
        robots.robot1.find("y") == robots.robot1.end() || robots.robot1.size() != 2)
        throw std::invalid_argument("run_trial: robots must have exactly axes {x, y}");
    if (options.periods <= options.discard_periods)
        throw std::invalid_argument("run_trial: trial must outlast the discarded transient");

    const double coupling_k =
        condition.mode == ExperimentMode::Connected ? condition.stiffness : 0.0;
    const double delay = condition.mode == ExperimentMode::Connected ? condition.delay : 0.0;

    const double tick = options.control_dt;
    const double dt_cap = delay > 0.0 ? std::min(delay / 20.0, 1e-3) : 1e-3;
    const int substeps = static_cast<int>(std::ceil(tick / dt_cap - 1e-12));
    const double dt = tick / substeps;

    AxisDdeIntegrator axis_x(
        AxisCouplingParams(robots.robot1.at("x"), robots.robot2.at("x"), coupling_k, delay), dt);
    AxisDdeIntegrator axis_y(
        AxisCouplingParams(robots.robot1.at("y"), robots.robot2.at("y"), coupling_k, delay), dt);

    Rng rng1(derive_seed(seed, agents.first.fingerprint()));
    Rng rng2(derive_seed(seed, agents.second.fingerprint()));

    std::optional<SpotCloud> cloud1, cloud2;
    if (agents.first.kind == AgentKind::Blurred)
        cloud1.emplace(agents.first.spot_count, agents.first.spot_velocity_std);
    if (agents.second.kind == AgentKind::Blurred)
        cloud2.emplace(agents.second.spot_count, agents.second.spot_velocity_std);

    const double duration = target.period() * options.periods;
    const double discard = target.period() * options.discard_periods;
    const int ticks = static_cast<int>(std::ceil(duration / tick - 1e-12));

    PlanarTrajectory traj;
    auto record_sample = [&](double t) {
        traj.times.push_back(t);
        traj.robot1.push_back({axis_x.x1(), axis_y.x1()});
        traj.robot2.push_back({axis_x.x2(), axis_y.x2()});
        traj.target.push_back(nominal_target(target, t));
    };
    record_sample(0.0);

    auto compute_force = [&](const AgentSpec& spec, std::optional<SpotCloud>& cloud,
                             const Vec2& nominal, const Vec2& current) {
        if (spec.kind == AgentKind::Skilled)
            return agent_force(spec, nominal, {}, current);
        const auto spots = cloud->positions(nominal);
        return agent_force(spec, nominal, spots, current);
    };

    bool diverged = false;
    for (int tk = 0; tk < ticks && !diverged; ++tk) {
        const double t = tk * tick;
        const Vec2 star = nominal_target(target, t);
        if (cloud1) cloud1->step(rng1, tick);
        if (cloud2) cloud2->step(rng2, tick);

        const Vec2 p1{axis_x.x1(), axis_y.x1()};
        const Vec2 p2{axis_x.x2(), axis_y.x2()};
        const Vec2 f1 = compute_force(agents.first, cloud1, star, p1);
        const Vec2 f2 = compute_force(agents.second, cloud2, star, p2);

        for (int s = 0; s < substeps; ++s) {
            const bool ok_x = axis_x.step([&](double) { return f1.x; },
                                          [&](double) { return f2.x; });
            const bool ok_y = axis_y.step([&](double) { return f1.y; },
                                          [&](double) { return f2.y; });
            if (!ok_x || !ok_y) {
                diverged = true;
                break;
            }
            record_sample(axis_x.time());
        }
    }

    std::size_t first_kept = 0;
    while (first_kept < traj.times.size() && traj.times[first_kept] < discard) ++first_kept;
    if (first_kept >= traj.times.size()) first_kept = 0;  // diverged within the transient

    const std::size_t kept = traj.times.size() - first_kept;
    TrialResult result;
    result.te1 = tracking_error({traj.robot1.data() + first_kept, kept},
                                {traj.target.data() + first_kept, kept});
    result.te2 = tracking_error({traj.robot2.data() + first_kept, kept},
                                {traj.target.data() + first_kept, kept});
    if (options.keep_trajectory) result.trajectory = std::move(traj);
    return result;
}

struct ExperimentOutcome {
    ExperimentCondition condition;
    std::vector<double> te1;  // m, one entry per trial
    std::vector<double> te2;  // m
    std::vector<std::uint64_t> trial_seeds;
};

enum class SignificanceMark { Greater, Less, None };

inline const char* to_string(SignificanceMark mark) {
    switch (mark) {
        case SignificanceMark::Greater: return "up";
        case SignificanceMark::Less: return "down";
        case SignificanceMark::None: return "-";
    }
    return "?";
}

struct ConditionSummary {
    std::string label;
    ExperimentMode mode = ExperimentMode::Unconnected;
    double stiffness = 0.0;
    double delay = 0.0;
    double te1_mean = 0.0, te1_sd = 0.0;
    double te2_mean = 0.0, te2_sd = 0.0;
    SignificanceMark te1_mark = SignificanceMark::None;
    SignificanceMark te2_mark = SignificanceMark::None;
    double te1_p = 1.0;
    double te2_p = 1.0;
};

struct ProtocolResult {
    std::vector<ExperimentOutcome> outcomes;
    std::vector<ConditionSummary> summaries;
    std::size_t baseline_index = 0;  // the unconnected condition
};

namespace detail {

inline double sample_mean(std::span<const double> v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

inline double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double mean = sample_mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double sample_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Run every condition of the grid (trials in parallel, each with a seed
/// derived from base_seed -> condition -> trial) and compare each TE sample
/// against the unconnected TE2 baseline with the two-sided rank-sum test at
/// alpha = 0.05.
inline ProtocolResult run_protocol(std::span<const ExperimentCondition> grid,
                                   const CouplingConfig& robots,
                                   const std::pair<AgentSpec, AgentSpec>& agents,
                                   const TargetSpec& target, std::uint64_t base_seed,
                                   const TrialOptions& options = {}) {
    if (grid.empty()) throw std::invalid_argument("run_protocol: empty condition grid");

    std::optional<std::size_t> baseline;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i].mode == ExperimentMode::Unconnected) {
            baseline = i;
            break;
        }
    }
    if (!baseline)
        throw std::invalid_argument(
            "run_protocol: grid must include the unconnected baseline condition");

    struct Job {
        std::size_t condition;
        int trial;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    ProtocolResult result;
    result.baseline_index = *baseline;
    result.outcomes.resize(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        grid[c].validate();
        const std::uint64_t condition_seed = derive_seed(base_seed, c);
        result.outcomes[c].condition = grid[c];
        result.outcomes[c].te1.resize(static_cast<std::size_t>(grid[c].trials));
        result.outcomes[c].te2.resize(static_cast<std::size_t>(grid[c].trials));
        result.outcomes[c].trial_seeds.resize(static_cast<std::size_t>(grid[c].trials));
        for (int t = 0; t < grid[c].trials; ++t) {
            const std::uint64_t trial_seed =
                derive_seed(condition_seed, static_cast<std::uint64_t>(t));
            result.outcomes[c].trial_seeds[static_cast<std::size_t>(t)] = trial_seed;
            jobs.push_back(Job{c, t, trial_seed});
        }
    }

    parallel_for(jobs.size(), [&](std::size_t j) {
        const Job& job = jobs[j];
        const TrialResult trial =
            run_trial(robots, agents, target, grid[job.condition], job.seed, options);
        result.outcomes[job.condition].te1[static_cast<std::size_t>(job.trial)] = trial.te1;
        result.outcomes[job.condition].te2[static_cast<std::size_t>(job.trial)] = trial.te2;
    });

    const std::vector<double>& baseline_te2 = result.outcomes[*baseline].te2;
    const double baseline_median = detail::sample_median(baseline_te2);

    for (std::size_t c = 0; c < grid.size(); ++c) {
        const ExperimentOutcome& outcome = result.outcomes[c];
        ConditionSummary row;
        row.label = grid[c].label;
        row.mode = grid[c].mode;
        row.stiffness = grid[c].mode == ExperimentMode::Connected ? grid[c].stiffness : 0.0;
        row.delay = grid[c].mode == ExperimentMode::Connected ? grid[c].delay : 0.0;
        row.te1_mean = detail::sample_mean(outcome.te1);
        row.te1_sd = detail::sample_sd(outcome.te1);
        row.te2_mean = detail::sample_mean(outcome.te2);
        row.te2_sd = detail::sample_sd(outcome.te2);

        auto mark_against_baseline = [&](const std::vector<double>& sample, double& p_out) {
            const RankSumResult test = rank_sum_test(sample, baseline_te2);
            p_out = test.p_value;
            if (test.p_value >= 0.05) return SignificanceMark::None;
            return detail::sample_median(sample) > baseline_median ? SignificanceMark::Greater
                                                                   : SignificanceMark::Less;
        };
        row.te1_mark = mark_against_baseline(outcome.te1, row.te1_p);
        if (c == *baseline) {
            row.te2_mark = SignificanceMark::None;  // baseline vs itself
            row.te2_p = 1.0;
        } else {
            row.te2_mark = mark_against_baseline(outcome.te2, row.te2_p);
        }
        result.summaries.push_back(std::move(row));
    }
    return result;
}

/// The published 17-condition grid: the unconnected baseline plus four
/// stiffness levels crossed with four delays.
inline std::vector<ExperimentCondition> paper_condition_grid(int trials = 20) {
    std::vector<ExperimentCondition> grid;
    grid.push_back(ExperimentCondition::unconnected(trials));
    for (double k : {18.0, 36.0, 71.0, 142.0}) {
        for (double delay_ms : {0.0, 84.0, 167.0, 334.0}) {
            grid.push_back(ExperimentCondition::connected(k, delay_ms / 1e3, trials));
        }
    }
    return grid;
}

}  // namespace dyadstab
