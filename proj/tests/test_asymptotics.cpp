#include "doctest.h"

#include "common.hpp"
#include "gpx/asymptotics.hpp"

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

Field q_bump(const Grid& g, const Point& c, double width = 1.0) {
    const auto& Q = profile(2.0);
    return sample(g, [&](const Point& x) { return Q((x - c).norm() / width); });
}

const std::vector<SolveReport>& sweep() {
    static const std::vector<SolveReport> reps = [] {
        SolveConfig c;
        c.n = 129;
        c.tol_pohozaev = 1e-3;
        return continuation_sweep(c, params(2.2), profile(2.0), {2.2, 2.1, 2.05});
    }();
    return reps;
}

}  // namespace

TEST_CASE("concentration point of a sampled soliton") {
    const Grid g = Grid::centered(Point(0, 0), 8.0, 8.0, 161, 161);
    const Point p(0.437, -1.213);
    const Point c = concentration_point(q_bump(g, p));
    CHECK((c - p).norm() < 0.2 * g.hx * g.hx + 1e-3);
    // translation by whole cells and reflection move the answer accordingly
    const Point shift(7 * g.hx, -3 * g.hy);
    const Point c2 = concentration_point(q_bump(g, p + shift));
    CHECK((c2 - (c + shift)).norm() < 1e-10);
    const Point c3 = concentration_point(reflect_x1(q_bump(g, p)));
    CHECK(c3.x() == doctest::Approx(-c.x()).epsilon(1e-10));
    CHECK(c3.y() == doctest::Approx(c.y()).epsilon(1e-10));
}

TEST_CASE("two comparable peaks are rejected") {
    const Grid g = Grid::centered(Point(0, 0), 8.0, 8.0, 129, 129);
    Field u = q_bump(g, Point(-3, 0));
    u.values() += 0.8 * q_bump(g, Point(3, 0)).values();
    CHECK_THROWS_AS(concentration_point(u), Error);
    Field v = q_bump(g, Point(-3, 0));
    v.values() += 0.2 * q_bump(g, Point(3, 0)).values();
    CHECK_NOTHROW(concentration_point(v));
}

TEST_CASE("blow-up rescaling of the exact w_q") {
    const double q = 2.2;
    const auto c = consts(q);
    const auto p = params(q);
    const double tau = tau_q(p.a, c);
    const Point x0(p.b1 * p.A, 0.0);
    const Grid g = Grid::centered(x0, 12 / tau, 12 / tau, 201, 201, Stencil::fourth_order);
    Field w = rescaled_soliton(profile(q), tau, x0, g);
    w.values() /= std::sqrt(mass(w));
    // against its own profile the comparison is an interpolation check
    const BlowupRecord self = blowup_rescale(w, profile(q), p, tau);
    CHECK(self.profile_err_L2 < 2e-3);
    CHECK(self.rescaled_mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(self.beta_hat - 1.0) < 2e-3);
    CHECK((self.x_c - x0).norm() < 1e-10);
    CHECK(self.ring_defect < 1e-8);
    CHECK(self.grad_ratio == doctest::Approx(1.0).epsilon(2e-3));
    // against Q the error is the phi_q - Q gap
    const BlowupRecord vsQ = blowup_rescale(w, profile(2.0), p, tau);
    CHECK(vsQ.profile_err_L2 > self.profile_err_L2);
    CHECK(vsQ.profile_err_L2 < 0.1);
}

TEST_CASE("second moment agrees with 2D quadrature of sampled Q") {
    const auto& Q = profile(2.0);
    const Grid g = Grid::centered(Point(0, 0), 16.0, 16.0, 641, 641);
    const Field u = sample(g, [&](const Point& x) { return Q(x.norm()); });
    const Field r2 = sample(g, [](const Point& x) { return x.squaredNorm(); });
    const double m2 = (r2.values() * u.values().square()).sum() / u.values().square().sum();
    CHECK(m2 == doctest::Approx(consts(2.2).second_moment).epsilon(1e-4));
}

TEST_CASE("energy bracket verdicts") {
    SolveReport r;
    r.K_stmt = 0.5 * 1.1875;
    r.K_proof = 1.1875 / (2 * 1.44);
    SolitonConstants c;
    c.second_moment = 1.1875;
    r.excess_scaled = 0.2;
    CHECK(energy_bracket_check(r, c).verdict == Verdict::inside_proof);
    r.excess_scaled = 0.5;
    CHECK(energy_bracket_check(r, c).verdict == Verdict::inside_stmt);
    r.excess_scaled = 0.7;
    CHECK(energy_bracket_check(r, c).verdict == Verdict::above);
    r.excess_scaled = -0.01;
    CHECK(energy_bracket_check(r, c).verdict == Verdict::below);
    r.excess_scaled = 0.0;  // V = 0 control sits exactly on the lower bound
    CHECK(energy_bracket_check(r, c).verdict == Verdict::inside_proof);
}

TEST_CASE("sweep trends toward the soliton limit") {
    const auto& reps = sweep();
    const auto t = convergence_table(reps, profile(2.0), params(2.2));
    REQUIRE(t.rows.size() == 3);
    for (const auto& v : t.violations) {
        CAPTURE(v.detail);
        CHECK(v.column != "ring_defect");
        CHECK(v.column != "profile_err_L2");
        CHECK(v.column != "mu_scaled");
        CHECK(v.column != "scale_separation");
    }
    for (const auto& b : t.brackets) CHECK(b.verdict == Verdict::inside_proof);
    CHECK(t.C1 > 0.0);
    CHECK(t.rows.back().profile_err_L2 < 0.15);
    CHECK(std::abs(t.rows.back().beta_hat - 1.0) < 0.1);
    CHECK(std::abs(t.rows.back().grad_ratio - 1.0) < 0.1);
    for (const auto& r : t.rows) {
        CHECK(r.mu_scaled < 0.0);
        CHECK(r.mu_scaled > -2.0);
        CHECK(std::abs(r.x_c.x() - 1.2) < 3 * reps[0].u_q.grid().hx);
    }
    CHECK_THROWS_AS(convergence_table({reps[0], reps[1]}, profile(2.0), params(2.2)), Error);
}

TEST_CASE("fitted constant stability") {
    ConvergenceTable a, b;
    a.C1 = 5.0;
    b.C1 = 4.0;
    a.C2_slack = b.C2_slack = true;
    CHECK(constants_stable(a, b));
    b.C1 = 11.0;
    CHECK_FALSE(constants_stable(a, b));
    b.C1 = 5.0;
    b.C2_slack = false;
    b.C2 = 3.0;
    CHECK_FALSE(constants_stable(a, b));
    a.C2_slack = false;
    a.C2 = 2.0;
    CHECK(constants_stable(a, b));
}
