#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "dyadstab/rng.hpp"
#include "dyadstab/stability.hpp"

using namespace dyadstab;
using Catch::Approx;

namespace {

const AxisDynamics kBase(0.8334, 7.7257);

// Reference per-axis estimates of the two arms.
const AxisDynamics kR1x(0.8334, 7.7257);
const AxisDynamics kR1y(1.0649, 10.1168);
const AxisDynamics kR2x(0.7776, 7.4208);
const AxisDynamics kR2y(1.3407, 9.3496);

CouplingConfig two_axis_config(double k, double delay) {
    AxisMap r1, r2;
    r1.emplace("x", kR1x);
    r1.emplace("y", kR1y);
    r2.emplace("x", kR2x);
    r2.emplace("y", kR2y);
    return CouplingConfig(std::move(r1), std::move(r2), k, delay);
}

double eval_f(const CubicCoefficients& c, double xi) {
    return ((c.c3 * xi + c.c2) * xi + c.c1) * xi + c.c0;
}

// Independent root locator for cross-checks: sign-change scan + bisection.
std::vector<double> bisection_positive_roots(const CubicCoefficients& c, double hi) {
    std::vector<double> roots;
    const int cells = 20000;
    double prev_x = 1e-12;
    double prev_f = eval_f(c, prev_x);
    for (int i = 1; i <= cells; ++i) {
        const double x = hi * i / cells;
        const double f = eval_f(c, x);
        if (prev_f == 0.0) roots.push_back(prev_x);
        if (prev_f * f < 0.0) {
            double a = prev_x, b = x;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                if (eval_f(c, a) * eval_f(c, mid) <= 0.0)
                    b = mid;
                else
                    a = mid;
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_x = x;
        prev_f = f;
    }
    return roots;
}

AxisDynamics random_dynamics(Rng& rng) {
    return AxisDynamics(0.3 + 2.0 * rng.uniform(), 3.0 + 9.0 * rng.uniform());
}

}  // namespace

TEST_CASE("axis dynamics rejects nonphysical parameters") {
    CHECK_THROWS_AS(AxisDynamics(0.0, 7.0), std::invalid_argument);
    CHECK_THROWS_AS(AxisDynamics(-1.0, 7.0), std::invalid_argument);
    CHECK_THROWS_AS(AxisDynamics(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(AxisDynamics(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("coupling config validates axis sets and parameters") {
    AxisMap r1, r2;
    r1.emplace("x", kBase);
    CHECK_THROWS_AS(CouplingConfig(r1, r2, 36.0, 0.1), std::invalid_argument);
    r2.emplace("y", kBase);
    CHECK_THROWS_AS(CouplingConfig(r1, r2, 36.0, 0.1), std::invalid_argument);
    AxisMap r2x;
    r2x.emplace("x", kBase);
    CHECK_THROWS_AS(CouplingConfig(r1, r2x, 0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(CouplingConfig(r1, r2x, 36.0, -0.1), std::invalid_argument);
    CHECK_NOTHROW(CouplingConfig(r1, r2x, 36.0, 0.0));
}

TEST_CASE("critical stiffness matches the reference dynamics") {
    // Identical arms: (b^2 + b^2) / (2 * 2m) = 35.81 N/m.
    const double km = critical_stiffness(kBase, kBase);
    CHECK(km == Approx(35.8090).epsilon(1e-4));

    // Per-axis pairs.
    CHECK(critical_stiffness(kR1x, kR2x) == Approx(35.6160).epsilon(1e-4));
    CHECK(critical_stiffness(kR1y, kR2y) == Approx(39.4423).epsilon(1e-4));
}

TEST_CASE("critical stiffness vanishes in the undamped limit") {
    double prev = critical_stiffness(AxisDynamics(1.0, 1.0), AxisDynamics(1.0, 1.0));
    for (double b : {0.1, 0.01, 0.001}) {
        const double km = critical_stiffness(AxisDynamics(1.0, b), AxisDynamics(1.0, b));
        CHECK(km < prev);
        prev = km;
    }
    CHECK(prev == Approx(0.0).margin(1e-6));
}

TEST_CASE("critical stiffness scales quadratically with damping") {
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        const AxisDynamics d1 = random_dynamics(rng);
        const AxisDynamics d2 = random_dynamics(rng);
        const AxisDynamics d1x2(d1.mass, 2.0 * d1.damping);
        const AxisDynamics d2x2(d2.mass, 2.0 * d2.damping);
        CHECK(critical_stiffness(d1x2, d2x2) ==
              Approx(4.0 * critical_stiffness(d1, d2)).epsilon(1e-12));
    }
}

TEST_CASE("crossing cubic coefficients specialise correctly") {
    const double k = 72.0;
    const auto c = f_xi_coefficients(kBase, kBase, k);
    const double m = kBase.mass, b = kBase.damping;

    CHECK(c.c3 == Approx(m * m * m * m));
    CHECK(c.c0 == Approx(2.0 * k * k * (b * b - 2.0 * k * m)));
    CHECK(c.c0 < 0.0);  // a crossing frequency must exist at this stiffness

    // c0 changes sign exactly at b^2 / (2m).
    const double km = b * b / (2.0 * m);
    CHECK(f_xi_coefficients(kBase, kBase, km * 0.999).c0 > 0.0);
    CHECK(f_xi_coefficients(kBase, kBase, km * 1.001).c0 < 0.0);
}

TEST_CASE("crossing cubic has no positive root when uncoupled") {
    const auto c = f_xi_coefficients(kBase, kBase, 0.0);
    CHECK(c.c0 == 0.0);
    CHECK(positive_real_roots(c).empty());
}

TEST_CASE("positive real roots recovers factored cubics") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        // Construct (x - r1)(x - r2)(x - r3) with known roots.
        double r[3];
        for (double& v : r) v = 0.1 + 20.0 * rng.uniform();
        std::sort(r, r + 3);
        if (r[1] - r[0] < 1e-3 || r[2] - r[1] < 1e-3) continue;  // keep roots separated
        const double c2 = -(r[0] + r[1] + r[2]);
        const double c1 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        const double c0 = -r[0] * r[1] * r[2];
        const auto roots = positive_real_roots(1.0, c2, c1, c0);
        REQUIRE(roots.size() == 3);
        for (int i = 0; i < 3; ++i)
            CHECK(roots[i] == Approx(r[i]).epsilon(1e-9));
    }
}

TEST_CASE("positive real roots agree with a bisection oracle at the base stiffness") {
    const auto c = f_xi_coefficients(kBase, kBase, 72.0);
    const auto roots = positive_real_roots(c);
    REQUIRE(roots.size() == 1);

    // Closed form for identical arms: xi = (2mk - b^2) / m^2.
    const double m = kBase.mass, b = kBase.damping;
    const double xi_expected = (2.0 * m * 72.0 - b * b) / (m * m);
    CHECK(roots[0] == Approx(xi_expected).epsilon(1e-9));
    CHECK(roots[0] == Approx(86.85).epsilon(1e-3));
    CHECK(std::sqrt(roots[0]) == Approx(9.32).epsilon(1e-3));

    const auto oracle = bisection_positive_roots(c, 10.0 * roots[0]);
    REQUIRE(oracle.size() == 1);
    CHECK(roots[0] == Approx(oracle[0]).epsilon(1e-7));
}

TEST_CASE("stiffness above the critical value always yields a crossing frequency") {
    Rng rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        const AxisDynamics d1 = random_dynamics(rng);
        const AxisDynamics d2 = random_dynamics(rng);
        const double km = critical_stiffness(d1, d2);
        const double k = km * (1.0 + 1.6 * rng.uniform());
        if (k - km < 1e-9 * km) continue;
        CHECK_FALSE(positive_real_roots(f_xi_coefficients(d1, d2, k)).empty());
    }
}

TEST_CASE("the reference arm pairs have no crossings below their critical stiffness") {
    // The sub-critical absence of crossings is what makes the critical
    // stiffness a delay-independence threshold for these dynamics.
    const std::vector<std::pair<AxisDynamics, AxisDynamics>> pairs = {
        {kBase, kBase}, {kR1x, kR2x}, {kR1y, kR2y}};
    for (const auto& [d1, d2] : pairs) {
        const double km = critical_stiffness(d1, d2);
        for (int i = 1; i <= 200; ++i) {
            const double k = km * i / 200.0;
            CHECK(positive_real_roots(f_xi_coefficients(d1, d2, k)).empty());
        }
    }
}

TEST_CASE("strongly mismatched pairs can cross below the critical stiffness") {
    // A lightly damped heavy axis against an overdamped light one: the product
    // |P1(jw) P2(jw)| dips below k^2 near the lightly damped resonance even
    // though k < k_m, so the critical-stiffness threshold alone is not
    // sufficient for delay-independence on such pairs. The classification
    // API intentionally keeps the published threshold semantics; this case
    // records the boundary of its validity.
    const AxisDynamics heavy_light_damping(1.909668, 3.988655);
    const AxisDynamics light_heavy_damping(0.640483, 11.736496);
    const double k = 24.942769;
    REQUIRE(k < critical_stiffness(heavy_light_damping, light_heavy_damping));

    const auto roots = positive_real_roots(
        f_xi_coefficients(heavy_light_damping, light_heavy_damping, k));
    REQUIRE(roots.size() == 2);
    for (double xi : roots) {
        const double omega = std::sqrt(xi);
        // Oracle: the open-loop magnitude condition |P1 P2| = k^2 holds.
        const double p1 = std::hypot(k - heavy_light_damping.mass * xi,
                                     heavy_light_damping.damping * omega);
        const double p2 = std::hypot(k - light_heavy_damping.mass * xi,
                                     light_heavy_damping.damping * omega);
        CHECK(p1 * p2 == Approx(k * k).epsilon(1e-9));
        // Each crossing corresponds to a genuine delay value.
        const Complex z = z_of_omega(heavy_light_damping, light_heavy_damping, k, omega);
        CHECK(std::abs(z) == Approx(1.0).epsilon(1e-9));
        CHECK(-std::arg(z) / omega > 0.0);
    }
}

TEST_CASE("z branch selection keeps the lower half-plane and solves the characteristic "
          "condition") {
    Rng rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        const AxisDynamics d1 = random_dynamics(rng);
        const AxisDynamics d2 = random_dynamics(rng);
        const double k = 1.0 + 150.0 * rng.uniform();
        const double omega = 0.05 + 60.0 * rng.uniform();
        const Complex z = z_of_omega(d1, d2, k, omega);
        CHECK(z.imag() <= 0.0);

        // a(j*omega, z) = A1*A2 - k^2 z^2 must vanish.
        const Complex a1(d1.mass * omega * omega - k, -d1.damping * omega);
        const Complex a2(d2.mass * omega * omega - k, -d2.damping * omega);
        const Complex residual = a1 * a2 - k * k * z * z;
        const double scale = std::max(1.0, std::abs(a1 * a2) + std::abs(k * k * z * z));
        CHECK(std::abs(residual) / scale < 1e-9);
    }
}

TEST_CASE("z at the crossing frequency matches the identical-arm closed form") {
    const double k = 72.0;
    const double m = kBase.mass, b = kBase.damping;
    const double omega = std::sqrt((2.0 * m * k - b * b) / (m * m));
    const Complex z = z_of_omega(kBase, kBase, k, omega);

    const Complex expected((m * k - b * b) / (m * k),
                           -b * std::sqrt(2.0 * m * k - b * b) / (m * k));
    CHECK(std::abs(z - expected) < 1e-9);
    CHECK(std::abs(z) == Approx(1.0).epsilon(1e-9));  // genuine delay-term value
}

TEST_CASE("z grows like the inertia term at high frequency") {
    const double k = 50.0;
    const double omega = 1e4;
    const Complex z = z_of_omega(kBase, kR2x, k, omega);
    const double expected = std::sqrt(kBase.mass * kR2x.mass) / k * omega * omega;
    CHECK(z.real() == Approx(expected).epsilon(1e-3));
    CHECK(std::fabs(z.imag()) < 0.05 * z.real());
}

TEST_CASE("maximum tolerable delay reproduces the reference values") {
    // Identical base arms at twice the (rounded) reference stiffness.
    const auto delay = max_tolerable_delay(kBase, kBase, 72.0);
    REQUIRE(delay.has_value());
    CHECK(*delay == Approx(0.16798).epsilon(1e-4));

    // Closed form agrees.
    const auto closed = max_tolerable_delay_identical(kBase, 72.0);
    REQUIRE(closed.has_value());
    CHECK(*closed == Approx(*delay).epsilon(1e-12));

    // Per-axis estimates at twice the multi-axis critical stiffness: the x
    // axis binds at about 0.167 s.
    const double kxy = std::min(critical_stiffness(kR1x, kR2x),
                                critical_stiffness(kR1y, kR2y));
    const auto dx = max_tolerable_delay(kR1x, kR2x, 2.0 * kxy);
    const auto dy = max_tolerable_delay(kR1y, kR2y, 2.0 * kxy);
    REQUIRE((dx.has_value() && dy.has_value()));
    CHECK(*dx == Approx(0.16719).epsilon(1e-3));
    CHECK(*dx < *dy);
}

TEST_CASE("the critical stiffness boundary has no tolerable-delay value") {
    const double km = critical_stiffness(kBase, kBase);
    CHECK_FALSE(max_tolerable_delay(kBase, kBase, km).has_value());
    CHECK_FALSE(max_tolerable_delay_identical(kBase, km).has_value());
    CHECK(max_tolerable_delay(kBase, kBase, km * (1.0 + 1e-9)).has_value());
}

TEST_CASE("the tolerable delay diverges as stiffness approaches the threshold") {
    const double km = critical_stiffness(kBase, kBase);
    double prev = 0.0;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const auto delay = max_tolerable_delay_identical(kBase, km * (1.0 + eps));
        REQUIRE(delay.has_value());
        CHECK(*delay > prev);
        prev = *delay;
    }
    CHECK(prev > 10.0);  // seconds, still climbing
}

TEST_CASE("the tolerable delay decays like damping/stiffness at high stiffness") {
    // From the closed form, arg z -> 0^- with delay ~ b / k, slope -1 on a
    // log-log fit.
    std::vector<double> log_k, log_d;
    for (double k : {1e4, 3e4, 1e5, 3e5, 1e6}) {
        const auto delay = max_tolerable_delay_identical(kBase, k);
        REQUIRE(delay.has_value());
        log_k.push_back(std::log(k));
        log_d.push_back(std::log(*delay));
    }
    double sxx = 0, sxy = 0, mx = 0, my = 0;
    for (std::size_t i = 0; i < log_k.size(); ++i) {
        mx += log_k[i];
        my += log_d[i];
    }
    mx /= log_k.size();
    my /= log_d.size();
    for (std::size_t i = 0; i < log_k.size(); ++i) {
        sxx += (log_k[i] - mx) * (log_k[i] - mx);
        sxy += (log_k[i] - mx) * (log_d[i] - my);
    }
    CHECK(sxy / sxx == Approx(-1.0).epsilon(1e-3));
    CHECK(*max_tolerable_delay_identical(kBase, 1e6) * 1e6 ==
          Approx(kBase.damping).epsilon(1e-3));
}

TEST_CASE("general and closed-form delays agree for random identical arms") {
    Rng rng(41);
    int checked = 0;
    while (checked < 200) {
        const AxisDynamics d = random_dynamics(rng);
        const double km = critical_stiffness(d, d);
        const double k = km * (1.05 + 3.0 * rng.uniform());
        const auto general = max_tolerable_delay(d, d, k);
        const auto closed = max_tolerable_delay_identical(d, k);
        REQUIRE(general.has_value());
        REQUIRE(closed.has_value());
        CHECK(*general == Approx(*closed).epsilon(1e-9));
        ++checked;
    }
}

TEST_CASE("tolerable delay decreases monotonically with stiffness") {
    const double km = critical_stiffness(kBase, kR2x);
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 50; ++i) {
        const double k = km * (1.02 + 4.0 * i / 49.0);
        const auto delay = max_tolerable_delay(kBase, kR2x, k);
        REQUIRE(delay.has_value());
        CHECK(*delay < prev);
        prev = *delay;
    }
}

TEST_CASE("classification covers the three stability regimes") {
    // Below the multi-axis critical stiffness: delay never destabilises.
    const auto di = classify(two_axis_config(35.0, 10.0));
    CHECK(di.aggregate.kind == StabilityKind::DelayIndependent);
    CHECK_FALSE(di.aggregate.max_delay.has_value());
    CHECK(di.aggregate.critical_stiffness == Approx(35.6160).epsilon(1e-4));

    // Reference stiffness 36 sits just above the unrounded threshold: the
    // verdict is delay-dependent with a large margin.
    const auto dd36 = classify(two_axis_config(36.0, 0.334));
    CHECK(dd36.aggregate.kind == StabilityKind::DelayDependent);
    REQUIRE(dd36.aggregate.max_delay.has_value());
    CHECK(*dd36.aggregate.max_delay > 1.0);

    // Fig-style cells at twice the reference stiffness.
    const auto stable = classify(two_axis_config(71.0, 0.084));
    CHECK(stable.aggregate.kind == StabilityKind::DelayDependent);
    const auto unstable = classify(two_axis_config(71.0, 0.334));
    CHECK(unstable.aggregate.kind == StabilityKind::Unstable);
    REQUIRE(unstable.aggregate.max_delay.has_value());
    CHECK(*unstable.aggregate.max_delay < 0.334);
}

TEST_CASE("aggregate verdict takes the worst axis and the smallest margins") {
    const auto result = classify(two_axis_config(71.0, 0.2));
    // x axis crosses at about 0.168 s, y axis at about 0.233 s: only x is
    // unstable at 200 ms.
    CHECK(result.per_axis.at("x").kind == StabilityKind::Unstable);
    CHECK(result.per_axis.at("y").kind == StabilityKind::DelayDependent);
    CHECK(result.aggregate.kind == StabilityKind::Unstable);

    double min_km = std::numeric_limits<double>::infinity();
    double min_delay = std::numeric_limits<double>::infinity();
    for (const auto& [axis, verdict] : result.per_axis) {
        min_km = std::min(min_km, verdict.critical_stiffness);
        if (verdict.max_delay) min_delay = std::min(min_delay, *verdict.max_delay);
        if (verdict.max_delay) CHECK(verdict.max_delay > 0.0);
        if (verdict.crossing_frequency) CHECK(verdict.crossing_frequency > 0.0);
    }
    CHECK(result.aggregate.critical_stiffness == Approx(min_km));
    REQUIRE(result.aggregate.max_delay.has_value());
    CHECK(*result.aggregate.max_delay == Approx(min_delay));
}

TEST_CASE("aggregation never reports a larger delay margin than any axis") {
    Rng rng(53);
    for (int trial = 0; trial < 100; ++trial) {
        AxisMap r1, r2;
        r1.emplace("x", random_dynamics(rng));
        r1.emplace("y", random_dynamics(rng));
        r2.emplace("x", random_dynamics(rng));
        r2.emplace("y", random_dynamics(rng));
        const double k = 5.0 + 150.0 * rng.uniform();
        const auto result = classify(CouplingConfig(r1, r2, k, 0.1));
        if (!result.aggregate.max_delay) continue;
        for (const auto& [axis, verdict] : result.per_axis) {
            if (verdict.max_delay) CHECK(*result.aggregate.max_delay <= *verdict.max_delay);
        }
    }
}
