#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "levystop/errors.hpp"

namespace levystop::detail {

/// Root of f in [lo, hi] given a sign change, bracketed by TOMS 748 and
/// polished with guarded Newton steps.
template <class F, class DF>
double solve_bracketed(F f, DF df, double lo, double hi, double flo, double fhi) {
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0))
        throw BracketFailure("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    std::uintmax_t iters = 200;
    boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 3);
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    double x = 0.5 * (a + b);
    double fx = f(x);
    for (int i = 0; i < 4 && fx != 0.0; ++i) {
        double d = df(x);
        if (!(std::abs(d) > 0.0) || !std::isfinite(d)) break;
        double x1 = x - fx / d;
        if (!(x1 >= lo && x1 <= hi)) break;
        double f1 = f(x1);
        if (!(std::abs(f1) < std::abs(fx))) break;
        x = x1;
        fx = f1;
    }
    return x;
}

}  // namespace levystop::detail
