#pragma once

// Positive radial solutions of -Delta u + (2/q) u = (2/q) u^{q+1} in R^2
// (q = 2 gives -Delta Q + Q = Q^3) and the constants derived from them.

#include <vector>

#include "gpx/fields.hpp"

namespace gpx {

struct DecayFit {
    double C = 0.0;
    double delta = 0.0;
    double residual = 0.0;  // rms of the log-linear fit
};

struct RadialProfile {
    double q = 2.0;
    double u0 = 0.0;
    double dr = 0.0;
    std::vector<double> r, u, du;  // r_k = k*dr, even number of intervals
    double r_trust = 0.0;          // beyond this the stored values come from the tail fit
    DecayFit decay;

    double r_max() const { return r.empty() ? 0.0 : r.back(); }
    double operator()(double rr) const;
    double deriv(double rr) const;
};

struct ShootOptions {
    double dr = 1e-3;
    double r_max = 25.0;
    double lo = 1.0 + 1e-4;  // turns upward
    double hi = 5.0;         // crosses zero
    int max_iter = 200;
};

RadialProfile shoot_soliton(double q, double tol = 1e-13, const ShootOptions& opt = {});

/// Least-squares fit of log u = log C - delta r on [r_a, r_b]; BadTail if the
/// window is too small or the fit residual is large.
DecayFit decay_fit(const std::vector<double>& r, const std::vector<double>& u, double r_a, double r_b);
DecayFit decay_fit(const RadialProfile& p);

/// 2 pi int f(r) r dr by composite Simpson on the profile grid.
template <typename F>
double radial_integral(const RadialProfile& p, F&& f);

struct SolitonConstants {
    double q = 2.0;
    double u0 = 0.0;
    double norm2_sq = 0.0;
    double a_q_star = 0.0;
    double a_star = 0.0;
    double grad_sq = 0.0;
    double pot_q2 = 0.0;
    double second_moment = 0.0;  // int |x|^2 Q^2 / ||Q||^2
    double pohozaev_res = 0.0;   // max relative defect of the three-way identity
};

SolitonConstants soliton_constants(const RadialProfile& profile, const RadialProfile& profileQ);

double tau_q(double a, const SolitonConstants& c);
/// (q-2)/(2q) tau^2
double c_tilde(double a, const SolitonConstants& c);

double h1_norm(const RadialProfile& p);
double h1_distance(const RadialProfile& p1, const RadialProfile& p2);

/// (tau/||phi||) phi(tau |x - center|) sampled on grid.
Field rescaled_soliton(const RadialProfile& profile, double tau, const Point& center, const Grid& grid);
Field rescaled_soliton(const RadialProfile& profile, double a, const SolitonConstants& c, const Point& center,
                       const Grid& grid);

template <typename F>
double radial_integral(const RadialProfile& p, F&& f) {
    const std::size_t n = p.r.size();
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = (k == 0 || k + 1 == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        s += w * f(k) * p.r[k];
    }
    return 2.0 * M_PI * s * p.dr / 3.0;
}

}  // namespace gpx
