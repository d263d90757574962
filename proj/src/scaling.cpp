#include "gpx/scaling.hpp"

#include <algorithm>
#include <limits>

namespace gpx {

Point center_of_mass(const Field& u) {
    const auto& g = u.grid();
    double sx = 0, sy = 0, m = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double w = u(i, j) * u(i, j);
            sx += w * (g.origin.x() - g.center().x() + i * g.hx);
            sy += w * (g.origin.y() - g.center().y() + j * g.hy);
            m += w;
        }
    if (!(m > 0.0)) return g.center();
    return g.center() + Point(sx / m, sy / m);
}

Field scale(const Field& u, double t, const Point& anchor) {
    if (!(t > 0.0)) throw Error(ErrorKind::DomainError, "dilation factor must be positive");
    Grid g = u.grid();
    g.hx /= t;
    g.hy /= t;
    g.origin = anchor + (u.grid().origin - anchor) / t;
    return Field(g, u.values() * t);
}

Field scale_onto(const Field& u, double t, const Point& anchor, const Grid& target) {
    if (!(t > 0.0)) throw Error(ErrorKind::DomainError, "dilation factor must be positive");
    const double hs = std::min(u.grid().hx, u.grid().hy) / t;
    if (hs < 0.5 * std::max(target.hx, target.hy))
        throw Error(ErrorKind::UnderResolved, "dilated field spacing " + std::to_string(hs) +
                                                  " is not resolved by the target grid");
    return sample(target, [&](const Point& x) { return t * interpolate(u, Point(anchor + t * (x - anchor))); });
}

double augmented_energy(const Field& u, double s, const ProblemParams& p) {
    const double es = std::exp(-s);
    const auto& g = u.grid();
    double pv = 0.0;
    if (p.trapped())
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) pv += potential(Point(g.node(i, j) * es), p) * u(i, j) * u(i, j);
    pv *= g.cell();
    return 0.5 * std::exp(2.0 * s) * grad_norm_sq(u) + 0.5 * pv -
           p.a / (p.q + 2.0) * std::exp(p.q * s) * lp_power(u, p.q + 2.0);
}

double vzero_scaled_energy(const Field& u, double t, double a, double q) {
    return 0.5 * t * t * grad_norm_sq(u) - a / (q + 2.0) * std::pow(t, q) * lp_power(u, q + 2.0);
}

namespace {

struct RadialNorms {
    double K, P;
};

RadialNorms radial_norms(const RadialProfile& prof, double tau) {
    const double q = prof.q;
    const double n2 = radial_integral(prof, [&](std::size_t k) { return prof.u[k] * prof.u[k]; });
    const double g2 = radial_integral(prof, [&](std::size_t k) { return prof.du[k] * prof.du[k]; });
    const double pq = radial_integral(prof, [&](std::size_t k) { return std::pow(prof.u[k], q + 2.0); });
    return {tau * tau * g2 / n2, std::pow(tau, q) * pq / std::pow(n2, (q + 2.0) / 2.0)};
}

double logsumexp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

bool boxes_overlap(const std::array<double, 4>& a, const std::array<double, 4>& b) {
    return a[0] < b[1] && b[0] < a[1] && a[2] < b[3] && b[2] < a[3];
}

}  // namespace

double vzero_scaled_energy(const RadialProfile& prof, double tau, double t, double a) {
    const auto n = radial_norms(prof, tau);
    const double q = prof.q;
    return 0.5 * t * t * n.K - a / (q + 2.0) * std::pow(t, q) * n.P;
}

ScaledMax vzero_scaled_max(const Field& u, double a, double q) {
    const double K = grad_norm_sq(u), P = lp_power(u, q + 2.0);
    auto f = [&](double lt) {
        const double t = std::exp(lt);
        return 0.5 * t * t * K - a / (q + 2.0) * std::pow(t, q) * P;
    };
    const double guess = std::log(std::pow((q + 2.0) * K / (q * a * P), 1.0 / (q - 2.0)));
    auto m = golden_max(f, guess - 3.0, guess + 3.0, 1e-13);
    return {std::exp(m.t), m.value};
}

ScaledMax vzero_scaled_max(const RadialProfile& prof, double tau, double a) {
    const auto n = radial_norms(prof, tau);
    const double q = prof.q;
    auto f = [&](double lt) {
        const double t = std::exp(lt);
        return 0.5 * t * t * n.K - a / (q + 2.0) * std::pow(t, q) * n.P;
    };
    auto m = golden_max(f, -3.0, 3.0, 1e-13);
    return {std::exp(m.t), m.value};
}

// ---- ScalingFamily ----

ScalingFamily::ScalingFamily(Field base, std::optional<Point> anchor) : base_(std::move(base)) {
    anchor_ = anchor ? *anchor : center_of_mass(base_);
    mass_ = gpx::mass(base_);
    K_ = grad_norm_sq(base_);
}

double ScalingFamily::log_lp(double log_t, double p) const {
    return (p - 2.0) * log_t + safe_log(lp_power(base_, p));
}

double ScalingFamily::potential_integral(double log_t, const ProblemParams& prm) const {
    if (!prm.trapped()) return 0.0;
    const RingFrame f(anchor_, prm);
    const double it = std::exp(-log_t);
    const auto& g = base_.grid();
    const double ox = g.origin.x() - anchor_.x(), oy = g.origin.y() - anchor_.y();
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        const double z = (oy + j * g.hy) * it;
        for (int i = 0; i < g.nx; ++i) {
            const double u = base_(i, j);
            if (u == 0.0) continue;
            const double d = f.offset((ox + i * g.hx) * it, z);
            s += d * d * u * u;
        }
    }
    return s * g.cell();
}

EnergyBreakdown ScalingFamily::energy(double log_t, const ProblemParams& prm) const {
    EnergyBreakdown e;
    e.kinetic = 0.5 * grad_sq(log_t);
    e.potential = 0.5 * potential_integral(log_t, prm);
    e.interaction = prm.a / (prm.q + 2.0) * std::exp(log_lp(log_t, prm.q + 2.0));
    e.total = e.kinetic + e.potential - e.interaction;
    return e;
}

std::array<double, 4> ScalingFamily::box(double log_t) const {
    const auto& g = base_.grid();
    const double it = std::exp(-log_t);
    const double x0 = g.origin.x() - g.hx, x1 = g.origin.x() + g.nx * g.hx;
    const double y0 = g.origin.y() - g.hy, y1 = g.origin.y() + g.ny * g.hy;
    return {anchor_.x() + (x0 - anchor_.x()) * it, anchor_.x() + (x1 - anchor_.x()) * it,
            anchor_.y() + (y0 - anchor_.y()) * it, anchor_.y() + (y1 - anchor_.y()) * it};
}

// ---- path ----

Field bump(double radius, int n) {
    const Grid g = Grid::centered(Point(0, 0), radius, radius, n, n, Stencil::fourth_order);
    Field u = sample(g, [&](const Point& x) {
        const double s = 1.0 - x.squaredNorm() / (radius * radius);
        return s > 0.0 ? s * s * s : 0.0;
    });
    u.values() /= std::sqrt(mass(u));
    return u;
}

PathSpec build_path(const ProblemParams& params, const Field& phi, const RadialProfile& profile,
                    const SolitonConstants& consts, const PathOptions& opt) {
    check_params(params, consts.a_star);
    if (std::abs(mass(phi) - 1.0) > 1e-10) throw Error(ErrorKind::DomainError, "endpoint phi must have unit mass");
    PathSpec P;
    P.params = params;
    P.consts = consts;
    P.samples = opt.samples;
    P.tau = tau_q(params.a, consts);
    P.x0 = opt.anchor ? *opt.anchor : Point(params.b1 * params.A, 0.0);
    const double q = params.q;

    const double half = opt.w_half / P.tau;
    const Grid gw = Grid::centered(P.x0, half, half, opt.w_nodes, opt.w_nodes, Stencil::fourth_order);
    Field w = rescaled_soliton(profile, P.tau, P.x0, gw);
    w.values() /= std::sqrt(mass(w));
    P.w = ScalingFamily(std::move(w), opt.anchor_at_origin ? Point(0, 0) : P.x0);
    P.phi = ScalingFamily(phi, Point(0, 0));

    P.t0 = std::sqrt((q - 2.0) / (12.0 * q));
    P.log_t1 = std::log(2.0) / ((q - 2.0) * (q - 2.0));
    const double lp_phi = P.phi.log_lp(0.0, q + 2.0);
    if (q * P.log_t1 + lp_phi > 650.0 || 2.0 * P.log_t1 + safe_log(P.phi.base_grad_sq()) > 650.0) {
        P.log_t1 = std::log(1e6 * P.tau);
        P.t1_capped = true;
    }

    if (boxes_overlap(P.w.box(std::log(P.t0)), P.phi.box(0.0))) {
        const Field& wb = P.w.base();
        const Point c = P.w.anchor();
        const double t0 = P.t0;
        Field A = sample(P.phi.base().grid(), [&](const Point& x) { return t0 * interpolate(wb, Point(c + t0 * (x - c))); });
        if ((A.values() != 0.0).any()) P.g1_overlap = std::move(A);
    }
    if (boxes_overlap(P.w.box(P.log_t1_tilde()), P.phi.box(P.log_t1)))
        throw Error(ErrorKind::GeometryViolated, "g2 endpoints overlap; anchor too close to the origin");
    return P;
}

double g3_excess(const PathSpec& path, double log_t) {
    const double q = path.params.q, tau = path.tau;
    return tau * tau * (0.5 * std::expm1(2.0 * log_t) - std::expm1(q * log_t) / q) +
           0.5 * path.w.potential_integral(log_t, path.params);
}

double g3_direct_energy(const PathSpec& path, double log_t) {
    return path.w.energy(log_t, path.params).total;
}

namespace {

/// (s A + (1-s) B)/norm for disjoint dilated parts, via scaling laws.
PathSample disjoint_mix(const PathSpec& P, const ScalingFamily& A, double la, const ScalingFamily& B, double lb,
                        double s) {
    const ProblemParams& prm = P.params;
    const double p = prm.q + 2.0;
    const double n2 = s * s * A.mass() + (1 - s) * (1 - s) * B.mass();
    const double K = (s * s * A.grad_sq(la) + (1 - s) * (1 - s) * B.grad_sq(lb)) / n2;
    const double V = (s > 0 ? s * s * A.potential_integral(la, prm) : 0.0) +
                     (s < 1 ? (1 - s) * (1 - s) * B.potential_integral(lb, prm) : 0.0);
    const double lP = logsumexp(s > 0 ? p * std::log(s) + A.log_lp(la, p) : -INFINITY,
                                s < 1 ? p * std::log(1 - s) + B.log_lp(lb, p) : -INFINITY) -
                      0.5 * p * std::log(n2);
    PathSample r;
    r.param = s;
    r.mass = 1.0;
    r.grad_sq = K;
    r.energy = 0.5 * K + 0.5 * V / n2 - prm.a / p * std::exp(lP);
    return r;
}

/// g1 with overlapping parts: disjoint laws plus cross terms over the phi box.
PathSample overlap_mix(const PathSpec& P, double s) {
    const ProblemParams& prm = P.params;
    const double p = prm.q + 2.0, lt0 = std::log(P.t0);
    const Field& A = *P.g1_overlap;
    const Field& B = P.phi.base();
    const double cell = B.grid().cell();
    const Field VB = potential_field(B.grid(), prm);
    const double mAB = inner(A, B), kAB = -inner(A, laplacian(B)), vAB = (VB.values() * A.values() * B.values()).sum() * cell;
    const double ss = s * s, rr = (1 - s) * (1 - s), sr = 2 * s * (1 - s);
    const double n2 = ss * P.w.mass() + rr * P.phi.mass() + sr * mAB;
    const double K = ss * P.w.grad_sq(lt0) + rr * P.phi.grad_sq(0.0) + sr * kAB;
    const double V = ss * P.w.potential_integral(lt0, prm) + rr * P.phi.potential_integral(0.0, prm) + sr * vAB;
    const double corr = ((s * A.values() + (1 - s) * B.values()).abs().pow(p) - (s * A.values()).abs().pow(p)).sum() * cell;
    const double Pw = s > 0 ? std::pow(s, p) * std::exp(P.w.log_lp(lt0, p)) : 0.0;
    PathSample r;
    r.param = s;
    r.mass = 1.0;
    r.grad_sq = K / n2;
    r.energy = 0.5 * K / n2 + 0.5 * V / n2 - prm.a / p * (Pw + corr) / std::pow(n2, 0.5 * p);
    return r;
}

}  // namespace

PathSample evaluate(const PathSpec& path, Segment seg, double param) {
    PathSample r;
    const double lt0 = std::log(path.t0), lt1 = path.log_t1_tilde();
    switch (seg) {
        case Segment::g3: {
            const double lt = lt0 + param * (lt1 - lt0);
            r.param = param;
            r.t = std::exp(lt);
            r.energy = path.lower() + g3_excess(path, lt);
            r.mass = path.w.mass();
            r.grad_sq = path.tau * path.tau * std::exp(2.0 * lt);
            break;
        }
        case Segment::g1:
            r = path.g1_overlap ? overlap_mix(path, param) : disjoint_mix(path, path.w, lt0, path.phi, 0.0, param);
            r.t = path.t0;
            break;
        case Segment::g2:
            r = disjoint_mix(path, path.w, lt1, path.phi, path.log_t1, param);
            r.t = std::exp(lt1);
            break;
    }
    r.segment = seg;
    return r;
}

PathMax path_max(const PathSpec& path) {
    PathMax m;
    const int n = std::max(path.samples, 3);
    const double tau2 = path.tau * path.tau;
    m.lower = path.lower();
    m.g1_bound = (path.params.q - 2.0) / (3.0 * path.params.q) * tau2;
    auto param = [&](int k) { return double(k) / double(n - 1); };

    std::vector<PathSample> g1, g3, g2;
    std::vector<double> g3ex;
    const double lt0 = std::log(path.t0), lt1 = path.log_t1_tilde();
    for (int k = 0; k < n; ++k) {
        g1.push_back(evaluate(path, Segment::g1, param(k)));
        g3.push_back(evaluate(path, Segment::g3, param(k)));
        g3ex.push_back(g3_excess(path, lt0 + param(k) * (lt1 - lt0)));
        g2.push_back(evaluate(path, Segment::g2, param(k)));
    }
    m.samples.insert(m.samples.end(), g1.begin(), g1.end());
    m.samples.insert(m.samples.end(), g3.begin(), g3.end());
    m.samples.insert(m.samples.end(), g2.rbegin(), g2.rend());

    auto argmax = [](const std::vector<PathSample>& v) {
        return std::size_t(std::max_element(v.begin(), v.end(), [](auto& a, auto& b) { return a.energy < b.energy; }) -
                           v.begin());
    };
    const std::size_t i1 = argmax(g1), i2 = argmax(g2);
    const std::size_t i3 = std::size_t(std::max_element(g3ex.begin(), g3ex.end()) - g3ex.begin());
    m.g1_max = g1[i1].energy;
    m.g2_max = g2[i2].energy;
    m.g3_sample_max = g3[i3].energy;
    m.E_start = g1.front().energy;
    m.E_end = g2.front().energy;

    // f is unimodal in log t on g3, and at q near 2 its peak is narrow compared with the
    // log-t sample spacing; refine both around the best sample and over the whole segment.
    auto ex = [&](double lt) { return g3_excess(path, lt); };
    const double a = lt0 + param(i3 == 0 ? 0 : int(i3) - 1) * (lt1 - lt0);
    const double b = lt0 + param(std::min(int(i3) + 1, n - 1)) * (lt1 - lt0);
    auto r3 = golden_max(ex, a, b, 1e-15);
    const auto rg = golden_max(ex, lt0, lt1, 1e-15);
    if (rg.value > r3.value) r3 = rg;
    if (m.lower + r3.value >= std::max(m.g1_max, m.g2_max)) {
        const auto& r = r3;
        m.segment = Segment::g3;
        m.t_q = std::exp(r.t);
        m.excess_scaled = tau2 * r.value;
        m.E_max = m.lower + r.value;
        m.sigma = (1.0 + (r.t - lt0) / (lt1 - lt0)) / 3.0;
    } else {
        const bool on1 = m.g1_max >= m.g2_max;
        const Segment seg = on1 ? Segment::g1 : Segment::g2;
        const std::size_t i = on1 ? i1 : i2;
        const double a = param(i == 0 ? 0 : int(i) - 1), b = param(std::min(int(i) + 1, n - 1));
        const auto r = golden_max([&](double s) { return evaluate(path, seg, s).energy; }, a, b, 1e-10);
        m.segment = seg;
        m.t_q = std::numeric_limits<double>::quiet_NaN();
        m.E_max = r.value;
        m.excess_scaled = tau2 * (r.value - m.lower);
        m.sigma = on1 ? r.t / 3.0 : (2.0 + (1.0 - r.t)) / 3.0;
    }
    if (!(m.E_max > std::max(m.E_start, m.E_end)))
        throw Error(ErrorKind::GeometryViolated, "path maximum does not exceed the endpoint energies");
    return m;
}

}  // namespace gpx
