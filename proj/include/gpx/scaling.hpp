#pragma once

// Dilations u^t(x) = t u(p + t(x - p)), the augmented energy E(H(u,s)),
// and the three-part path through w_q^t.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gpx/functionals.hpp"
#include "gpx/radial.hpp"

namespace gpx {

Point center_of_mass(const Field& u);

/// Exact dilation by regridding: spacing h/t about the anchor, values times t.
/// Mass, t^2 K and t^{p-2} int|u|^p hold to rounding.
Field scale(const Field& u, double t, const Point& anchor = Point(0, 0));

/// Dilation interpolated onto a given grid; UnderResolved if the dilated
/// spacing is finer than half the target spacing.
Field scale_onto(const Field& u, double t, const Point& anchor, const Grid& target);

/// E(H(u,s)) with H(u,s)(x) = e^s u(e^s x), evaluated without resampling:
/// (1/2) e^{2s} K + (1/2) int V(e^{-s} x) u^2 - a/(q+2) e^{qs} int |u|^{q+2}.
double augmented_energy(const Field& u, double s, const ProblemParams& p);

/// V = 0 energy of t u(t .): (1/2) t^2 K - a/(q+2) t^q P.
double vzero_scaled_energy(const Field& u, double t, double a, double q);
/// Same for the radial soliton rescaled by tau, using radial quadrature.
double vzero_scaled_energy(const RadialProfile& prof, double tau, double t, double a);

struct ScaledMax {
    double t = 0.0;
    double value = 0.0;
};

/// Golden-section search for the maximizer of a unimodal f on [lo, hi].
template <typename F>
ScaledMax golden_max(F&& f, double lo, double hi, double tol = 1e-12, int max_iter = 300) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++i) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? ScaledMax{c, fc} : ScaledMax{d, fd};
}

ScaledMax vzero_scaled_max(const Field& u, double a, double q);
ScaledMax vzero_scaled_max(const RadialProfile& prof, double tau, double a);

/// Dilation family of a fixed base field, evaluated through the scaling laws
/// so that arbitrarily large t never materializes.
class ScalingFamily {
public:
    ScalingFamily() = default;
    explicit ScalingFamily(Field base, std::optional<Point> anchor = std::nullopt);

    const Field& base() const { return base_; }
    const Point& anchor() const { return anchor_; }
    double mass() const { return mass_; }
    double base_grad_sq() const { return K_; }

    double grad_sq(double log_t) const { return std::exp(2.0 * log_t) * K_; }
    double log_lp(double log_t, double p) const;
    double potential_integral(double log_t, const ProblemParams& prm) const;
    EnergyBreakdown energy(double log_t, const ProblemParams& prm) const;

    /// Dirichlet box of u^t as (xmin, xmax, ymin, ymax).
    std::array<double, 4> box(double log_t) const;

    Field at(double t) const { return scale(base_, t, anchor_); }

private:
    Field base_;
    Point anchor_{0.0, 0.0};
    double mass_ = 0.0, K_ = 0.0;
};

enum class Segment { g1 = 1, g3 = 3, g2 = 2 };

inline const char* to_string(Segment s) {
    return s == Segment::g1 ? "g1" : s == Segment::g2 ? "g2" : "g3";
}

struct PathSample {
    Segment segment = Segment::g1;
    double param = 0.0;  // local parameter in [0,1]
    double t = 0.0;      // dilation of w_q involved
    double energy = 0.0;
    double mass = 0.0;
    double grad_sq = 0.0;
};

struct PathOptions {
    int samples = 64;
    int w_nodes = 257;          // nodes per side of the w_q grid
    double w_half = 12.0;       // half-width of the w_q grid in units of 1/tau
    double bump_radius = 0.5;   // support radius of the endpoint bump phi
    int bump_nodes = 129;
    std::optional<Point> anchor;  // defaults to (b1 A, 0)
    bool anchor_at_origin = false;  // dilate w_q about the origin instead of its centre
};

/// Compactly supported unit-mass bump c (1 - |x|^2/R^2)^3 centred at the origin.
Field bump(double radius, int n);

struct PathSpec {
    ProblemParams params;
    SolitonConstants consts;
    double tau = 0.0;
    Point x0{0.0, 0.0};
    ScalingFamily phi;  // dilated about the origin
    ScalingFamily w;    // w_q, dilated about x0 (or the origin)
    double t0 = 0.0;      // t~0 = sqrt((q-2)/(12 q))
    double log_t1 = 0.0;  // log t1, t1 = 2^{(q-2)^{-2}} unless capped
    bool t1_capped = false;
    int samples = 64;
    // w^{t~0} sampled on the phi grid when the two overlap; cross terms of g1
    std::optional<Field> g1_overlap;

    double log_t1_tilde() const { return log_t1 - std::log(tau); }
    double lower() const { return (params.q - 2.0) / (2.0 * params.q) * tau * tau; }
    double K_stmt() const { return 0.5 * consts.second_moment; }
    double K_proof() const { return consts.second_moment / (2.0 * params.b1 * params.b1); }
};

PathSpec build_path(const ProblemParams& params, const Field& phi, const RadialProfile& profile,
                    const SolitonConstants& consts, const PathOptions& opt = {});

/// Point on a segment: g1(s), g2(s) as normalized combinations, g3 by log t
/// interpolation between t~0 (param 0) and t~1 (param 1).
PathSample evaluate(const PathSpec& path, Segment seg, double param);

/// f(t) - (q-2)/(2q) tau^2 on g3 at t = e^{log_t}, without cancellation.
double g3_excess(const PathSpec& path, double log_t);
/// E(w^t) from the discrete integrals of the w_q grid.
double g3_direct_energy(const PathSpec& path, double log_t);

struct PathMax {
    Segment segment = Segment::g3;
    double sigma = 0.0;  // global parameter in [0,1]
    double t_q = 0.0;
    double E_max = 0.0;
    double excess_scaled = 0.0;  // tau^2 (E_max - lower)
    double lower = 0.0;
    double E_start = 0.0, E_end = 0.0;
    double g1_max = 0.0, g2_max = 0.0, g3_sample_max = 0.0;
    double g1_bound = 0.0;  // (q-2)/(3q) tau^2
    std::vector<PathSample> samples;
};

PathMax path_max(const PathSpec& path);

}  // namespace gpx
