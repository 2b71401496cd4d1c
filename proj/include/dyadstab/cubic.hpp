// Closed-form real-root extraction for cubic polynomials with Newton
// polishing. The analytic form avoids iteration-count ambiguity; polishing
// absorbs the cancellation the trigonometric branch can suffer.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dyadstab {

namespace detail {

inline double eval_cubic(double c3, double c2, double c1, double c0, double x) {
    return ((c3 * x + c2) * x + c1) * x + c0;
}

inline double eval_cubic_derivative(double c3, double c2, double c1, double x) {
    return (3.0 * c3 * x + 2.0 * c2) * x + c1;
}

/// Magnitude scale of the polynomial at x, used for relative residuals.
inline double cubic_scale(double c3, double c2, double c1, double c0, double x) {
    const double ax = std::fabs(x);
    return std::fabs(c3) * ax * ax * ax + std::fabs(c2) * ax * ax +
           std::fabs(c1) * ax + std::fabs(c0);
}

inline double polish_root(double c3, double c2, double c1, double c0, double x) {
    double best = x;
    double best_abs = std::fabs(eval_cubic(c3, c2, c1, c0, x));
    for (int it = 0; it < 5; ++it) {
        const double f = eval_cubic(c3, c2, c1, c0, x);
        const double df = eval_cubic_derivative(c3, c2, c1, x);
        if (df == 0.0) break;
        x -= f / df;
        if (!std::isfinite(x)) break;
        const double fx = std::fabs(eval_cubic(c3, c2, c1, c0, x));
        if (fx < best_abs) {
            best = x;
            best_abs = fx;
        } else {
            break;
        }
    }
    return best;
}

}  // namespace detail

/// All real roots of c3 x^3 + c2 x^2 + c1 x + c0 (c3 != 0), ascending.
/// Double roots are reported once.
inline std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0) {
    if (c3 == 0.0) throw std::invalid_argument("real_cubic_roots: leading coefficient is zero");

    const double a = c2 / c3;
    const double b = c1 / c3;
    const double c = c0 / c3;

    // Depressed form t^3 + p t + q with x = t - a/3.
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double shift = -a / 3.0;

    std::vector<double> roots;
    const double half_q = q / 2.0;
    const double third_p = p / 3.0;
    const double disc = half_q * half_q + third_p * third_p * third_p;

    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-half_q + s);
        const double v = std::cbrt(-half_q - s);
        roots.push_back(u + v + shift);
    } else {
        // Three real roots: trigonometric form.
        const double r = std::sqrt(std::max(0.0, -third_p));
        double phi = 0.0;
        if (r > 0.0) {
            const double arg = std::clamp(-half_q / (r * r * r), -1.0, 1.0);
            phi = std::acos(arg);
        }
        for (int k = 0; k < 3; ++k) {
            roots.push_back(2.0 * r * std::cos((phi + 2.0 * M_PI * k) / 3.0) + shift);
        }
    }

    for (double& root : roots) root = detail::polish_root(c3, c2, c1, c0, root);
    std::sort(roots.begin(), roots.end());

    // Drop duplicates produced when distinct analytic branches polish to the
    // same point.
    std::vector<double> unique;
    for (double root : roots) {
        if (!unique.empty()) {
            const double tol = 1e-7 * std::max({1.0, std::fabs(root), std::fabs(unique.back())});
            if (std::fabs(root - unique.back()) <= tol) continue;
        }
        unique.push_back(root);
    }
    return unique;
}

}  // namespace dyadstab
