#include "doctest.h"

#include <random>
#include <sstream>

#include "gpx/fields.hpp"

using namespace gpx;

namespace {

Grid box(double half, int n, Stencil st = Stencil::five_point) {
    return Grid::centered(Point(0, 0), half, half, n, n, st);
}

Field random_field(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Field u(g);
    for (auto& v : u.values()) v = nd(rng);
    return u;
}

}  // namespace

TEST_CASE("ellipse_norm examples") {
    EllipseMetric<double> m{1.2, 1.0};
    CHECK(ellipse_norm(Point(0, 0), m) == 0.0);
    CHECK(ellipse_norm(Point(1.2, 0), m) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ellipse_norm(Point(1, 1), EllipseMetric<double>{2.0, 1.0}) ==
          doctest::Approx(std::sqrt(5.0) / 2.0).epsilon(1e-15));
    CHECK(ellipse_norm(Point(3, 4), EllipseMetric<double>{1.0, 1.0}) == doctest::Approx(5.0).epsilon(1e-15));
    // long double instantiation
    CHECK(ellipse_norm(Point2<long double>(1.2L, 0), EllipseMetric<long double>{1.2L, 1.0L}) ==
          doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("potential examples and sign") {
    ProblemParams p;
    p.a = 1.0;
    CHECK(potential(Point(0, 0), p) == doctest::Approx(1.0));
    CHECK(potential(Point(1.2, 0), p) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(potential(Point(0, 1.0), p) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(potential(Point(2.4, 0), p) == doctest::Approx(1.0).epsilon(1e-14));
    p.potential = PotentialKind::zero;
    CHECK(potential(Point(5, 5), p) == 0.0);
    p.potential = PotentialKind::ellipse;
    const Grid g = box(3.0, 61);
    const double h = g.hx;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const Point x = g.node(i, j);
            const double v = potential(x, p);
            CHECK(v >= 0.0);
            if (v < 1e-14) CHECK(std::abs(ellipse_norm(x, p.metric()) - p.A) < h);
        }
}

TEST_CASE("RingFrame offset agrees with the direct formula and stays accurate for tiny offsets") {
    ProblemParams p;
    p.a = 1.0;
    const RingFrame f(Point(1.2, 0.0), p);
    for (double s : {0.3, -0.2, 0.05}) {
        for (double z : {0.0, 0.1, -0.4}) {
            const double direct = ellipse_norm(Point(1.2 + s, z), p.metric()) - p.A;
            CHECK(f.offset(s, z) == doctest::Approx(direct).epsilon(1e-12));
        }
    }
    // |x|_b - A ~ s/b1 to leading order, far below rounding of x itself
    const double s = 1e-14;
    CHECK(f.offset(s, 0.0) == doctest::Approx(s / 1.2).epsilon(1e-2));
}

TEST_CASE("zero field gives zero integrals") {
    const Field u(box(4.0, 32));
    CHECK(mass(u) == 0.0);
    CHECK(grad_norm_sq(u) == 0.0);
    CHECK(lp_power(u, 4.2) == 0.0);
}

TEST_CASE("Gaussian mass and gradient norm") {
    for (auto st : {Stencil::five_point, Stencil::fourth_order}) {
        const Grid g = box(8.0, 161, st);
        const Field u = sample(g, [](const Point& x) { return std::exp(-x.squaredNorm() / 2.0) / std::sqrt(M_PI); });
        CHECK(mass(u) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(grad_norm_sq(u) == doctest::Approx(1.0).epsilon(st == Stencil::five_point ? 5e-3 : 5e-5));
    }
}

TEST_CASE("gradient norm converges under refinement") {
    double prev_err = 0.0;
    for (int n : {39, 79, 159}) {
        const Grid g = box(8.0, n);
        const Field u = sample(g, [](const Point& x) { return std::exp(-x.squaredNorm() / 2.0) / std::sqrt(M_PI); });
        const double err = std::abs(grad_norm_sq(u) - 1.0);
        if (prev_err > 0.0) CHECK(err < prev_err / 3.0);
        prev_err = err;
    }
}

TEST_CASE("quadrature order at least two") {
    // Field that does not vanish at the box edge, so the midpoint rule error is visible.
    auto f = [](const Point& x) { return std::cos(0.3 * x.x()) * std::exp(0.2 * x.y()); };
    auto exact = [] {
        const double ix = 2.0 + std::sin(1.2) / 0.6;
        const double iy = (std::exp(0.4 * 2.0) - std::exp(-0.4 * 2.0)) / 0.4;
        return ix * iy;
    }();
    double prev = 0.0;
    for (int n : {32, 64, 128}) {
        // cell-centred nodes on [-2,2]^2
        Grid g;
        g.nx = g.ny = n;
        g.hx = g.hy = 4.0 / n;
        g.origin = Point(-2.0 + g.hx / 2, -2.0 + g.hy / 2);
        const Field u = sample(g, f);
        const double err = std::abs(mass(u) - exact);
        if (prev > 0.0) CHECK(prev / err > 3.5);
        prev = err;
    }
}

TEST_CASE("laplacian of a constant vanishes away from the boundary") {
    for (auto st : {Stencil::five_point, Stencil::fourth_order}) {
        const Grid g = box(1.0, 20, st);
        Field u(g);
        u.values().setConstant(3.0);
        const Field l = laplacian(u);
        for (int j = 2; j < g.ny - 2; ++j)
            for (int i = 2; i < g.nx - 2; ++i) CHECK(std::abs(l(i, j)) < 1e-9);
    }
}

TEST_CASE("discrete sine eigenfunction") {
    const double L = 2.0;
    const int n = 31;
    Grid g;
    g.nx = g.ny = n;
    g.hx = g.hy = L / (n + 1);
    g.origin = Point(g.hx, g.hy);
    const Field u = sample(g, [&](const Point& x) { return std::sin(M_PI * x.x() / L) * std::sin(M_PI * x.y() / L); });
    const double lam = 2.0 * (2.0 / (g.hx * g.hx)) * (1.0 - std::cos(M_PI * g.hx / L));
    const Field l = laplacian(u);
    CHECK(((l.values() + lam * u.values()).abs().maxCoeff()) < 1e-10);
}

TEST_CASE("laplacian is symmetric and negative semi-definite") {
    for (auto st : {Stencil::five_point, Stencil::fourth_order}) {
        const Grid g = box(2.0, 24, st);
        for (std::uint64_t s = 0; s < 5; ++s) {
            const Field u = random_field(g, 2 * s + 1), v = random_field(g, 2 * s + 2);
            const double a = inner(laplacian(u), v), b = inner(u, laplacian(v));
            CHECK(std::abs(a - b) < 1e-12 * (std::abs(a) + std::abs(b)));
            CHECK(inner(u, laplacian(u)) <= 0.0);
            CHECK(grad_norm_sq(u) == doctest::Approx(-inner(u, laplacian(u))).epsilon(1e-12));
        }
        const Field u = random_field(g, 99);
        const Eigen::VectorXd Au = neg_laplacian_matrix(g) * u.values().matrix();
        CHECK((Au.array() + laplacian(u).values()).abs().maxCoeff() < 1e-9 * Au.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("FIELD2D dump round-trips bit-exactly") {
    Grid g = box(1.7, 17);
    g.origin = Point(0.1 + 1.0 / 3.0, -2.0 / 7.0);
    const Field u = random_field(g, 7);
    std::stringstream ss;
    write_field(ss, u);
    std::string header;
    std::getline(ss, header);
    CHECK(header.rfind("FIELD2D 17 17 ", 0) == 0);
    ss.seekg(0);
    const Field w = read_field(ss);
    CHECK(w.grid() == u.grid());
    CHECK(std::memcmp(w.values().data(), u.values().data(), sizeof(double) * std::size_t(u.values().size())) == 0);
    std::stringstream bad("FIELD3D 1 2\n");
    CHECK_THROWS_AS(read_field(bad), Error);
}

TEST_CASE("reflection and interpolation") {
    const Grid g = Grid::centered(Point(1.0, 0.2), 1.0, 1.0, 41, 41);
    const Field u = sample(g, [](const Point& x) { return std::exp(-(x - Point(1.1, 0.25)).squaredNorm() * 4); });
    const Field r = reflect_x1(u);
    const Point p(-1.05, 0.31);
    CHECK(interpolate(r, p) == doctest::Approx(interpolate(u, Point(1.05, 0.31))).epsilon(1e-13));
    CHECK(interpolate(u, Point(1.05, 0.31)) ==
          doctest::Approx(std::exp(-(Point(1.05, 0.31) - Point(1.1, 0.25)).squaredNorm() * 4)).epsilon(1e-3));
    CHECK(interpolate(u, g.node(7, 9)) == doctest::Approx(u(7, 9)).epsilon(1e-14));
    CHECK(interpolate(u, Point(5, 5)) == 0.0);
}
