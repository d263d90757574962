#include "gpx/radial.hpp"

#include <cmath>
#include <string>

namespace gpx {

namespace {

enum class Fate { crosses, turns_up, undecided };

struct Rhs {
    double c;  // 2/q
    double q;
    double nl(double u) const { return std::pow(std::abs(u), q) * u; }
    // u'' = -u'/r + c u - c |u|^q u
    double acc(double r, double u, double p) const { return -p / r + c * (u - nl(u)); }
};

struct Trajectory {
    Fate fate = Fate::undecided;
    std::vector<double> u, du;  // on r_k = k*dr, k = 0..
};

Trajectory integrate(const Rhs& f, double u0, double dr, double r_end, bool keep) {
    Trajectory t;
    const double g0 = f.c * (u0 - f.nl(u0));
    const double a2 = g0 / 4.0;
    const double a4 = f.c * (1.0 - (f.q + 1.0) * std::pow(u0, f.q)) * a2 / 16.0;
    double r = dr;
    double u = u0 + a2 * r * r + a4 * r * r * r * r;
    double p = 2.0 * a2 * r + 4.0 * a4 * r * r * r;
    if (keep) {
        t.u = {u0, u};
        t.du = {0.0, p};
    }
    const long steps = long(std::ceil(r_end / dr));
    for (long k = 1; k < steps; ++k) {
        const double k1u = p, k1p = f.acc(r, u, p);
        const double k2u = p + 0.5 * dr * k1p, k2p = f.acc(r + 0.5 * dr, u + 0.5 * dr * k1u, k2u);
        const double k3u = p + 0.5 * dr * k2p, k3p = f.acc(r + 0.5 * dr, u + 0.5 * dr * k2u, k3u);
        const double k4u = p + dr * k3p, k4p = f.acc(r + dr, u + dr * k3u, k4u);
        u += dr / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p += dr / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        r = double(k + 1) * dr;
        if (keep) {
            t.u.push_back(u);
            t.du.push_back(p);
        }
        if (u < 0.0) {
            t.fate = Fate::crosses;
            return t;
        }
        if (p > 0.0) {
            t.fate = Fate::turns_up;
            return t;
        }
    }
    return t;
}

}  // namespace

double RadialProfile::operator()(double rr) const {
    rr = std::abs(rr);
    if (rr >= r_max()) return decay.C * std::exp(-decay.delta * rr);
    const double f = rr / dr;
    const std::size_t k = std::size_t(f);
    const double t = f - double(k);
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * u[k] + h10 * dr * du[k] + h01 * u[k + 1] + h11 * dr * du[k + 1];
}

double RadialProfile::deriv(double rr) const {
    rr = std::abs(rr);
    if (rr >= r_max()) return -decay.delta * decay.C * std::exp(-decay.delta * rr);
    const double f = rr / dr;
    const std::size_t k = std::size_t(f);
    const double t = f - double(k);
    const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1;
    const double d01 = -6 * t * t + 6 * t, d11 = 3 * t * t - 2 * t;
    return (d00 * u[k] + d01 * u[k + 1]) / dr + d10 * du[k] + d11 * du[k + 1];
}

DecayFit decay_fit(const std::vector<double>& r, const std::vector<double>& u, double r_a, double r_b) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (r[k] < r_a || r[k] > r_b) continue;
        if (!(u[k] > 1e-300)) continue;
        const double y = std::log(u[k]);
        sx += r[k];
        sy += y;
        sxx += r[k] * r[k];
        sxy += r[k] * y;
        ++n;
    }
    if (n < 20) throw Error(ErrorKind::BadTail, "tail window has " + std::to_string(n) + " usable points");
    const double dn = double(n);
    const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / dn;
    double ss = 0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (r[k] < r_a || r[k] > r_b || !(u[k] > 1e-300)) continue;
        const double e = std::log(u[k]) - (icpt + slope * r[k]);
        ss += e * e;
    }
    DecayFit fit{std::exp(icpt), -slope, std::sqrt(ss / dn)};
    if (!(fit.delta > 0.0) || fit.residual > 0.05)
        throw Error(ErrorKind::BadTail, "exponential tail fit failed (delta=" + std::to_string(fit.delta) +
                                            ", rms=" + std::to_string(fit.residual) + ")");
    return fit;
}

DecayFit decay_fit(const RadialProfile& p) {
    return decay_fit(p.r, p.u, 0.75 * p.r_trust, p.r_trust);
}

RadialProfile shoot_soliton(double q, double tol, const ShootOptions& opt) {
    if (!(q >= 2.0 && q <= 4.0)) throw Error(ErrorKind::DomainError, "shoot_soliton needs q in [2, 4]");
    if (!(tol > 0.0)) throw Error(ErrorKind::DomainError, "tol must be positive");
    const Rhs f{2.0 / q, q};
    const double r_shoot = 80.0;
    double lo = opt.lo, hi = opt.hi;
    if (integrate(f, lo, opt.dr, r_shoot, false).fate != Fate::turns_up ||
        integrate(f, hi, opt.dr, r_shoot, false).fate != Fate::crosses)
        throw Error(ErrorKind::NonBracketed, "u(0) interval [" + std::to_string(lo) + ", " +
                                                 std::to_string(hi) + "] does not separate behaviours");
    int it = 0;
    for (; it < opt.max_iter && hi - lo > tol * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const Fate fm = integrate(f, mid, opt.dr, r_shoot, false).fate;
        if (fm == Fate::crosses) hi = mid;
        else if (fm == Fate::turns_up) lo = mid;
        else { lo = hi = mid; break; }
    }
    if (hi - lo > tol * hi && it >= opt.max_iter)
        throw Error(ErrorKind::NoConvergence, "shooting bisection did not reach tol");

    const Trajectory tl = integrate(f, lo, opt.dr, r_shoot, true);
    const Trajectory th = integrate(f, hi, opt.dr, r_shoot, true);
    const std::size_t m = std::min(tl.u.size(), th.u.size());

    RadialProfile p;
    p.q = q;
    p.u0 = 0.5 * (lo + hi);
    p.dr = opt.dr;
    // trusted while the two bracketing trajectories agree and the profile decreases
    std::size_t kt = 1;
    for (; kt < m; ++kt) {
        const double a = tl.u[kt], b = th.u[kt];
        if (std::abs(a - b) > 1e-7 * std::abs(a) || tl.du[kt] >= 0.0 || th.du[kt] >= 0.0 || b <= 0.0) break;
    }
    kt -= 1;
    std::vector<double> rr(kt + 1), uu(kt + 1), dd(kt + 1);
    for (std::size_t k = 0; k <= kt; ++k) {
        rr[k] = double(k) * opt.dr;
        uu[k] = 0.5 * (tl.u[k] + th.u[k]);
        dd[k] = 0.5 * (tl.du[k] + th.du[k]);
    }
    p.r_trust = rr[kt];
    p.decay = decay_fit(rr, uu, 0.75 * p.r_trust, p.r_trust);

    double r_end = std::max(opt.r_max, p.r_trust);
    while (p.decay.C * std::exp(-p.decay.delta * r_end) >= 1e-8 * p.u0) r_end += 5.0;
    std::size_t n = std::size_t(std::ceil(r_end / opt.dr));
    if (n % 2) ++n;
    p.r.resize(n + 1);
    p.u.resize(n + 1);
    p.du.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        p.r[k] = double(k) * opt.dr;
        if (k <= kt) {
            p.u[k] = uu[k];
            p.du[k] = dd[k];
        } else {
            p.u[k] = p.decay.C * std::exp(-p.decay.delta * p.r[k]);
            p.du[k] = -p.decay.delta * p.u[k];
        }
    }
    return p;
}

SolitonConstants soliton_constants(const RadialProfile& profile, const RadialProfile& profileQ) {
    SolitonConstants c;
    const double q = profile.q;
    c.q = q;
    c.u0 = profile.u0;
    c.norm2_sq = radial_integral(profile, [&](std::size_t k) { return profile.u[k] * profile.u[k]; });
    c.grad_sq = radial_integral(profile, [&](std::size_t k) { return profile.du[k] * profile.du[k]; });
    c.pot_q2 = radial_integral(profile, [&](std::size_t k) { return std::pow(profile.u[k], q + 2.0); });
    c.a_q_star = std::pow(c.norm2_sq, q / 2.0);
    const double nQ = radial_integral(profileQ, [&](std::size_t k) { return profileQ.u[k] * profileQ.u[k]; });
    c.a_star = nQ;
    c.second_moment = radial_integral(profileQ, [&](std::size_t k) {
                          return profileQ.r[k] * profileQ.r[k] * profileQ.u[k] * profileQ.u[k];
                      }) / nQ;
    const double d1 = std::abs(c.grad_sq - c.norm2_sq);
    const double d2 = std::abs(c.norm2_sq - 2.0 / (q + 2.0) * c.pot_q2);
    c.pohozaev_res = std::max(d1, d2) / c.norm2_sq;
    return c;
}

double tau_q(double a, const SolitonConstants& c) {
    if (!(c.q > 2.0)) throw Error(ErrorKind::DomainError, "tau_q needs q > 2");
    if (!(a > 0.0) || !(a < c.a_star)) throw Error(ErrorKind::DomainError, "tau_q needs 0 < a < a*");
    return std::pow(2.0 * c.a_q_star / (c.q * a), 1.0 / (c.q - 2.0));
}

double c_tilde(double a, const SolitonConstants& c) {
    const double t = tau_q(a, c);
    return (c.q - 2.0) / (2.0 * c.q) * t * t;
}

double h1_norm(const RadialProfile& p) {
    return std::sqrt(radial_integral(p, [&](std::size_t k) { return p.u[k] * p.u[k] + p.du[k] * p.du[k]; }));
}

double h1_distance(const RadialProfile& p1, const RadialProfile& p2) {
    const RadialProfile& longer = p1.r.size() >= p2.r.size() ? p1 : p2;
    if (p1.dr != p2.dr) throw Error(ErrorKind::DomainError, "h1_distance needs matching radial steps");
    return std::sqrt(radial_integral(longer, [&](std::size_t k) {
        const double r = longer.r[k];
        const double du = p1(r) - p2(r), dd = p1.deriv(r) - p2.deriv(r);
        return du * du + dd * dd;
    }));
}

Field rescaled_soliton(const RadialProfile& profile, double tau, const Point& center, const Grid& grid) {
    const double h = std::max(grid.hx, grid.hy);
    if (1.0 / tau < 8.0 * h)
        throw Error(ErrorKind::UnderResolved, "core width 1/tau = " + std::to_string(1.0 / tau) +
                                                  " is below 8 grid spacings");
    const double n2 = radial_integral(profile, [&](std::size_t k) { return profile.u[k] * profile.u[k]; });
    const double amp = tau / std::sqrt(n2);
    return sample(grid, [&](const Point& x) { return amp * profile(tau * (x - center).norm()); });
}

Field rescaled_soliton(const RadialProfile& profile, double a, const SolitonConstants& c, const Point& center,
                       const Grid& grid) {
    return rescaled_soliton(profile, tau_q(a, c), center, grid);
}

}  // namespace gpx
