#include "doctest.h"

#include "common.hpp"
#include "gpx/scaling.hpp"

using namespace gpx;
using testutil::consts;
using testutil::profile;

namespace {

ProblemParams params(double q) {
    ProblemParams p;
    p.q = q;
    p.a = consts(q).a_star / 2.0;
    return p;
}

const PathSpec& path_for(double q) {
    static std::map<double, PathSpec> cache;
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(q);
    if (it == cache.end()) it = cache.emplace(q, build_path(params(q), bump(0.5, 129), profile(q), consts(q))).first;
    return it->second;
}

}  // namespace

TEST_CASE("dilation scaling laws hold to rounding") {
    const Grid g = Grid::centered(Point(0.3, -0.2), 2.0, 1.5, 96, 80, Stencil::fourth_order);
    const Field u = testutil::smooth_field(g, 7);
    const double K = grad_norm_sq(u), P = lp_power(u, 4.4);
    for (double t : {0.25, 1.0, 3.0, 40.0}) {
        const Field v = scale(u, t, Point(1.0, 0.5));
        CHECK(mass(v) == doctest::Approx(mass(u)).epsilon(1e-13));
        CHECK(grad_norm_sq(v) == doctest::Approx(t * t * K).epsilon(1e-12));
        CHECK(lp_power(v, 4.4) == doctest::Approx(std::pow(t, 2.4) * P).epsilon(1e-12));
    }
    const Field same = scale(u, 1.0, Point(1.0, 0.5));
    CHECK((same.values() == u.values()).all());
    CHECK(same.grid().origin.x() == u.grid().origin.x());
    CHECK_THROWS_AS(scale(u, 0.0), Error);
}

TEST_CASE("scale_onto matches the regridded dilation") {
    const Grid g = Grid::centered(Point(0, 0), 3.0, 3.0, 121, 121, Stencil::fourth_order);
    const Field u = sample(g, [](const Point& x) { return std::exp(-x.squaredNorm()); });
    const Grid target = Grid::centered(Point(0.5, 0), 1.5, 1.5, 101, 101, Stencil::fourth_order);
    const Field v = scale_onto(u, 2.0, Point(0.5, 0), target);
    double err = 0.0;
    for (int k = 0; k < target.size(); ++k) {
        const Point x = target.node(k % target.nx, k / target.nx);
        const Point y = Point(0.5, 0) + 2.0 * (x - Point(0.5, 0));
        err = std::max(err, std::abs(v.values()[k] - 2.0 * std::exp(-y.squaredNorm())));
    }
    CHECK(err < 5e-4);
    const Grid coarse = Grid::centered(Point(0, 0), 3.0, 3.0, 21, 21);
    CHECK_THROWS_AS(scale_onto(u, 20.0, Point(0, 0), coarse), Error);
}

TEST_CASE("augmented energy: s = 0, derivative and regrid consistency") {
    const auto p = params(2.5);
    const Grid g = Grid::centered(Point(0.2, 0.1), 3.0, 3.0, 121, 121, Stencil::fourth_order);
    const Field u = testutil::smooth_field(g, 11);
    CHECK(augmented_energy(u, 0.0, p) == doctest::Approx(energy(u, p).total).epsilon(1e-13));
    const double h = 1e-4;
    const double d = (augmented_energy(u, h, p) - augmented_energy(u, -h, p)) / (2 * h);
    const double Q = pohozaev_Q(u, p);
    CHECK(std::abs(d - Q) < 1e-5 * (1.0 + std::abs(Q)));
    for (double s : {-0.7, 0.4, 1.3})
        CHECK(augmented_energy(u, s, p) ==
              doctest::Approx(energy(scale(u, std::exp(s)), p).total).epsilon(1e-11));
}

TEST_CASE("V = 0 dilation maximum of the soliton sits at t = 1 with value c~") {
    for (double q : {2.2, 2.5, 3.0}) {
        CAPTURE(q);
        const auto c = consts(q);
        const double a = c.a_star / 2.0, tau = tau_q(a, c);
        const auto m = vzero_scaled_max(profile(q), tau, a);
        const double ct = c_tilde(a, c);
        CHECK(std::abs(m.t - 1.0) < 1e-4);
        CHECK(std::abs(m.value - ct) < 1e-5 * ct);
        CHECK(vzero_scaled_energy(profile(q), tau, 1.0, a) == doctest::Approx(m.value).epsilon(1e-8));

        const Grid g = Grid::centered(Point(0, 0), 12 / tau, 12 / tau, 201, 201, Stencil::fourth_order);
        Field w = rescaled_soliton(profile(q), tau, Point(0, 0), g);
        w.values() /= std::sqrt(mass(w));
        const auto mg = vzero_scaled_max(w, a, q);
        CHECK(std::abs(mg.t - 1.0) < 1e-2);
        CHECK(std::abs(mg.value - ct) < 2e-3 * ct);
    }
}

TEST_CASE("scaling family evaluates energies through the scaling laws") {
    const auto p = params(2.5);
    const Field b = bump(0.5, 65);
    CHECK(mass(b) == doctest::Approx(1.0).epsilon(1e-14));
    const ScalingFamily f(b, Point(0.1, 0.0));
    for (double lt : {-0.5, 0.0, 0.8}) {
        const auto e = f.energy(lt, p);
        const auto d = energy(f.at(std::exp(lt)), p);
        CHECK(e.kinetic == doctest::Approx(d.kinetic).epsilon(1e-11));
        CHECK(e.potential == doctest::Approx(d.potential).epsilon(1e-9));
        CHECK(e.interaction == doctest::Approx(d.interaction).epsilon(1e-11));
    }
    // log-space exponent stays finite far beyond the double range of t^q
    CHECK(std::isfinite(f.log_lp(400.0, 4.5)));
    const auto bx = f.box(std::log(2.0));
    CHECK(bx[1] - bx[0] == doctest::Approx(0.5 * (b.grid().hx * (b.grid().nx + 1))).epsilon(1e-12));
}

TEST_CASE("glued path: masses, endpoints and the maximum on g3") {
    for (double q : {2.2, 2.1, 2.05}) {
        CAPTURE(q);
        const PathSpec& P = path_for(q);
        const PathMax m = path_max(P);
        for (const auto& s : m.samples) CHECK(std::abs(s.mass - 1.0) < 1e-10);
        CHECK(m.samples.size() == std::size_t(3 * P.samples));
        CHECK(m.segment == Segment::g3);
        CHECK(m.E_max >= m.lower);
        CHECK(m.excess_scaled <= 1.5 * std::max(P.K_stmt(), P.K_proof()));
        CHECK(m.E_max > std::max(m.E_start, m.E_end));
        CHECK(m.excess_scaled > 0.0);
        CHECK(m.g1_max < m.g1_bound);
        CHECK(m.E_end < 0.0);
        CHECK(std::abs(m.t_q - 1.0) < 0.5);
        // endpoints: phi and its t1 dilation
        const auto e0 = evaluate(P, Segment::g1, 0.0);
        CHECK(e0.energy == doctest::Approx(energy(P.phi.base(), P.params).total).epsilon(1e-10));
        // g2 is negative throughout
        for (int k = 0; k <= 10; ++k) CHECK(evaluate(P, Segment::g2, k / 10.0).energy < 0.0);
    }
}

TEST_CASE("g3 closed form tracks the discrete energy of w^t") {
    const PathSpec& P = path_for(2.2);
    const double ct = P.lower();
    for (double lt : {std::log(P.t0), std::log(0.7), 0.0, std::log(2.0)}) {
        const double closed = ct + g3_excess(P, lt);
        const double direct = g3_direct_energy(P, lt);
        CHECK(std::abs(closed - direct) < 2e-3 * (std::abs(closed) + ct));
    }
}

TEST_CASE("path geometry fails far from q = 2") {
    CHECK_THROWS_AS(build_path(params(3.0), bump(0.5, 129), profile(3.0), consts(3.0)), Error);
}

TEST_CASE("path endpoints survive a t1 cap") {
    const PathSpec& P = path_for(2.2);
    CHECK(std::isfinite(P.log_t1));
    if (!P.t1_capped) CHECK(P.log_t1 == doctest::Approx(std::log(2.0) / 0.04).epsilon(1e-12));
}
