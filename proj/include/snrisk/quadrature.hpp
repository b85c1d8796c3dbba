#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <stdexcept>

namespace snrisk {

// Adaptive Gauss-Kronrod on [a,b] to the requested relative tolerance.
template <class F>
double integrate(const F& f, double a, double b, double rel_tol) {
    if (!(a <= b)) throw std::invalid_argument("integrate: empty or reversed interval");
    if (a == b) return 0.0;
    double error = 0.0;
    double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, /*max_depth=*/18, rel_tol, &error);
    return value;
}

// Bracketed bisection for a monotone function; tol is absolute in x.
template <class F>
double bisect_root(const F& f, double lo, double hi, double target, double tol) {
    double flo = f(lo) - target;
    double fhi = f(hi) - target;
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::runtime_error("bisect_root: root not bracketed");
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // hit floating point resolution
        double fm = f(mid) - target;
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace snrisk
