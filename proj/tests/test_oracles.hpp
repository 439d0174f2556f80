// Test-only numerical oracles, independent of the implementation paths
// they check: a series / continued-fraction erfc, adaptive Simpson
// quadrature, and centered finite differences.

#pragma once

#include <cmath>
#include <functional>

namespace oracle {

// erfc via the Maclaurin series of erf for small arguments and the
// classical continued fraction for large ones. Deliberately does not
// call std::erf / std::erfc.
inline double erf_series(double x) {
    const double x2 = x * x;
    double term = x;  // x^(2n+1) / n!'s running term
    double sum = 0.0;
    for (int n = 0; n < 200; ++n) {
        const double contrib = term / (2 * n + 1);
        sum += (n % 2 == 0) ? contrib : -contrib;
        term *= x2 / (n + 1);
        if (std::fabs(term / (2 * n + 3)) < 1e-18 * std::fabs(sum)) break;
    }
    return 2.0 / std::sqrt(M_PI) * sum;
}

inline double erfc_continued_fraction(double x) {
    // sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))));
    // evaluated by backward recurrence, fully converged for x >= 2
    double t = 0.0;
    for (int n = 400; n >= 1; --n) t = (n / 2.0) / (x + t);
    return std::exp(-x * x) / std::sqrt(M_PI) / (x + t);
}

inline double erfc(double x) {
    if (x < 0.0) return 2.0 - erfc(-x);
    if (x < 2.0) return 1.0 - erf_series(x);
    return erfc_continued_fraction(x);
}

/// Gaussian tail through the independent erfc.
inline double q_function(double x) { return 0.5 * erfc(x / std::sqrt(2.0)); }

// Adaptive Simpson quadrature.
inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 60);
}

/// Centered finite difference.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double got, double want) {
    return std::fabs(got - want) / std::fabs(want);
}

}  // namespace oracle
