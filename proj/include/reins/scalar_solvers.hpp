#pragma once

#include <cmath>
#include <stdexcept>

namespace reins {

/// Thrown when a root/boundary solver cannot bracket a sign change.
struct BracketFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Bisection on a bracketing interval [lo, hi] with f(lo) and f(hi) of
/// opposite sign. Runs until the interval width drops below width_tol.
template <class F>
double bisect(F&& f, double lo, double hi, double flo, double fhi,
              double width_tol, int max_iter = 200) {
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0))
        throw BracketFailure("bisect: endpoints do not bracket a sign change");
    for (int it = 0; it < max_iter && hi - lo > width_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

template <class F>
double bisect(F&& f, double lo, double hi, double width_tol, int max_iter = 200) {
    return bisect(f, lo, hi, f(lo), f(hi), width_tol, max_iter);
}

/// Golden-section minimization of a unimodal function on [lo, hi].
template <class F>
double golden_min(F&& f, double lo, double hi, double width_tol, int max_iter = 400) {
    constexpr double frac = 0.3819660112501051;  // (3 - sqrt 5)/2
    double a = lo, b = hi;
    double x1 = a + frac * (b - a), x2 = b - frac * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < max_iter && b - a > width_tol; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + frac * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - frac * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

}  // namespace detail
}  // namespace reins
