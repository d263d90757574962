#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <vector>

namespace oracle {

struct QValues {
    long double u0;
    long double norm2_sq;
};

/// Ground state of -Delta Q + Q = Q^3 by shooting with Butcher's 6-stage
/// fifth-order Runge-Kutta in long double, bisection on Q(0), and trapezoid
/// quadrature of the agreeing part of the two bracketing trajectories.
inline QValues ground_state(long double dr = 1e-4L, long double tol = 1e-17L) {
    using LD = long double;
    struct St { LD u, p; };
    auto rhs = [](LD r, St s) { return St{s.p, -s.p / r + s.u - s.u * s.u * s.u}; };
    auto step = [&](LD r, St s) {
        auto add = [](St a, LD h, St k) { return St{a.u + h * k.u, a.p + h * k.p}; };
        const St k1 = rhs(r, s);
        const St k2 = rhs(r + dr / 4, add(s, dr / 4, k1));
        const St k3 = rhs(r + dr / 4, St{s.u + dr / 8 * (k1.u + k2.u), s.p + dr / 8 * (k1.p + k2.p)});
        const St k4 = rhs(r + dr / 2, St{s.u + dr * (-k2.u / 2 + k3.u), s.p + dr * (-k2.p / 2 + k3.p)});
        const St k5 = rhs(r + 3 * dr / 4, St{s.u + dr * (3 * k1.u / 16 + 9 * k4.u / 16),
                                             s.p + dr * (3 * k1.p / 16 + 9 * k4.p / 16)});
        const St k6 = rhs(r + dr, St{s.u + dr * (-3 * k1.u / 7 + 2 * k2.u / 7 + 12 * k3.u / 7 - 12 * k4.u / 7 + 8 * k5.u / 7),
                                     s.p + dr * (-3 * k1.p / 7 + 2 * k2.p / 7 + 12 * k3.p / 7 - 12 * k4.p / 7 + 8 * k5.p / 7)});
        return St{s.u + dr / 90 * (7 * k1.u + 32 * k3.u + 12 * k4.u + 32 * k5.u + 7 * k6.u),
                  s.p + dr / 90 * (7 * k1.p + 32 * k3.p + 12 * k4.p + 32 * k5.p + 7 * k6.p)};
    };
    // returns +1 crosses zero, -1 turns up
    auto run = [&](LD u0, std::vector<LD>* keep) {
        const LD g = u0 - u0 * u0 * u0;
        St s{u0 + g / 4 * dr * dr, g / 2 * dr};
        if (keep) keep->assign({u0, s.u});
        LD r = dr;
        for (long k = 1; k < long(40 / dr); ++k) {
            s = step(r, s);
            r = (k + 1) * dr;
            if (keep) keep->push_back(s.u);
            if (s.u < 0) return 1;
            if (s.p > 0) return -1;
        }
        return 0;
    };
    LD lo = 1.5L, hi = 3.0L;
    while (hi - lo > tol) {
        const LD m = (lo + hi) / 2;
        const int f = run(m, nullptr);
        if (f > 0) hi = m;
        else if (f < 0) lo = m;
        else break;
    }
    std::vector<LD> a, b;
    run(lo, &a);
    run(hi, &b);
    LD sum = 0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t k = 1; k < n; ++k) {
        if (std::fabs(a[k] - b[k]) > 1e-6L * a[k]) break;
        const LD r0 = (k - 1) * dr, r1 = k * dr;
        const LD u0 = (a[k - 1] + b[k - 1]) / 2, u1 = (a[k] + b[k]) / 2;
        sum += (r0 * u0 * u0 + r1 * u1 * u1) / 2 * dr;
    }
    return {(lo + hi) / 2, 2 * 3.14159265358979323846264338327950288L * sum};
}

}  // namespace oracle
