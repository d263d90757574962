#include "gpx/functionals.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>

namespace gpx {

Field potential_field(const Grid& g, const ProblemParams& p) {
    return sample(g, [&](const Point& x) { return potential(x, p); });
}

namespace {

Field ring_field(const Grid& g, const ProblemParams& p) {
    return sample(g, [&](const Point& x) { return ring_term(x, p); });
}

}  // namespace

EnergyBreakdown energy(const Field& u, const ProblemParams& p) {
    EnergyBreakdown e;
    e.kinetic = 0.5 * grad_norm_sq(u);
    e.potential = 0.5 * inner(potential_field(u.grid(), p), Field(u.grid(), u.values().square()));
    e.interaction = p.a / (p.q + 2.0) * lp_power(u, p.q + 2.0);
    e.total = e.kinetic + e.potential - e.interaction;
    return e;
}

Field energy_gradient(const Field& u, const ProblemParams& p) {
    Field g = laplacian(u);
    const Field V = potential_field(u.grid(), p);
    g.values() = -g.values() + V.values() * u.values() - p.a * u.values().abs().pow(p.q) * u.values();
    return g;
}

Field euler_lagrange_residual(const Field& u, double mu, const ProblemParams& p) {
    Field r = energy_gradient(u, p);
    r.values() -= mu * u.values();
    return r;
}

Field tangent_gradient(const Field& u, const ProblemParams& p) {
    Field g = energy_gradient(u, p);
    const double uu = inner(u, u);
    if (uu > 0.0) g.values() -= (inner(g, u) / uu) * u.values();
    return g;
}

double rayleigh_mu(const Field& u, const ProblemParams& p) {
    const Field V = potential_field(u.grid(), p);
    const double pv = (V.values() * u.values().square()).sum() * u.grid().cell();
    return (grad_norm_sq(u) + pv - p.a * lp_power(u, p.q + 2.0)) / mass(u);
}

double pohozaev_Q(const Field& u, const ProblemParams& p) {
    const Field R = ring_field(u.grid(), p);
    const double ring = (R.values() * u.values().square()).sum() * u.grid().cell();
    return grad_norm_sq(u) - ring - p.q * p.a / (p.q + 2.0) * lp_power(u, p.q + 2.0);
}

double pohozaev_Qtilde(const Field& u, double a, double q) {
    return grad_norm_sq(u) - q * a / (q + 2.0) * lp_power(u, q + 2.0);
}

double qtilde_root(const Field& u, double a, double q) {
    const double K = grad_norm_sq(u), P = lp_power(u, q + 2.0);
    if (!(P > 0.0)) throw Error(ErrorKind::DomainError, "qtilde_root needs int |u|^{q+2} > 0");
    return std::pow((q + 2.0) * K / (q * a * P), 1.0 / (q - 2.0));
}

double gn_check(const Field& u, const SolitonConstants& c) {
    const double q = c.q;
    const double m = mass(u);
    if (!(m > 0.0)) throw Error(ErrorKind::DomainError, "gn_check needs nonzero mass");
    const double K = grad_norm_sq(u), P = lp_power(u, q + 2.0);
    return P / ((q + 2.0) / (2.0 * c.a_q_star) * std::pow(K, q / 2.0) * m);
}

std::pair<double, double> identity_321(const Field& u, const ProblemParams& p) {
    const Field V = potential_field(u.grid(), p);
    const Field R = ring_field(u.grid(), p);
    const double w = u.grid().cell();
    const auto u2 = u.values().square();
    const double lhs =
        (p.q - 2.0) / 2.0 * grad_norm_sq(u) + 0.5 * ((p.q * V.values() + 2.0 * R.values()) * u2).sum() * w;
    const double rhs = p.q * energy(u, p).total - pohozaev_Q(u, p);
    return {lhs, rhs};
}

Lambda1 lambda1(const ProblemParams& p, int n, double margin, double tol) {
    const double L = p.b1 * p.A + margin;
    const Grid g = Grid::centered(Point(0, 0), L, L, n, n);
    Eigen::SparseMatrix<double> H = neg_laplacian_matrix(g);
    const Field V = potential_field(g, p);
    for (Eigen::Index k = 0; k < g.size(); ++k) H.coeffRef(k, k) += V.values()[k];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(H);
    if (chol.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "lambda_1 factorization failed");
    Eigen::VectorXd x = Eigen::VectorXd::Ones(g.size());
    x.normalize();
    Lambda1 out;
    double prev = 0.0;
    for (int it = 1; it <= 500; ++it) {
        Eigen::VectorXd y = chol.solve(x);
        y.normalize();
        const double rq = y.dot(H * y);
        x = y;
        out.iterations = it;
        out.value = rq;
        if (it > 1 && std::abs(rq - prev) <= tol * std::abs(rq)) break;
        prev = rq;
    }
    out.mode = Field(g, x.array() / std::sqrt(g.cell()));
    return out;
}

}  // namespace gpx
