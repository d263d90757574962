#include "gpx/solver.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gpx {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

void SolveConfig::validate() const {
    if (n < 33) throw Error(ErrorKind::RangeError, "nx: need at least 33 nodes per side");
    if (!(L >= 4.0)) throw Error(ErrorKind::RangeError, "L: box half-width must be at least 4 core widths");
    if (!(tol_residual > 0.0)) throw Error(ErrorKind::RangeError, "tol_residual: must be positive");
    if (!(tol_pohozaev > 0.0)) throw Error(ErrorKind::RangeError, "tol_pohozaev: must be positive");
    if (max_newton_iters < 1) throw Error(ErrorKind::RangeError, "max_newton_iters: must be at least 1");
    if (!(damping_min > 0.0 && damping_min <= 1.0)) throw Error(ErrorKind::RangeError, "damping_min: must lie in (0, 1]");
    if (threads < 1) throw Error(ErrorKind::RangeError, "threads: must be at least 1");
    for (std::size_t k = 0; k < q_schedule.size(); ++k) {
        if (!(q_schedule[k] > 2.0)) throw Error(ErrorKind::RangeError, "q_schedule: entries must exceed 2");
        if (k > 0 && !(q_schedule[k] < q_schedule[k - 1]))
            throw Error(ErrorKind::RangeError, "q_schedule: must be strictly decreasing");
    }
}

namespace {

/// Seed dilation t_q: the maximizer of the energy along the path, else 1.
double seed_dilation(const ProblemParams& params, const RadialProfile& profile, const SolitonConstants& consts,
                     const Point& x0) {
    if (!params.trapped()) return 1.0;
    try {
        PathOptions o;
        o.anchor = x0;
        const PathSpec P = build_path(params, bump(o.bump_radius, o.bump_nodes), profile, consts, o);
        const PathMax m = path_max(P);
        if (m.segment == Segment::g3 && std::isfinite(m.t_q)) return m.t_q;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::GeometryViolated && e.kind() != ErrorKind::UnderResolved) throw;
    }
    return 1.0;
}

struct Frame {
    ProblemParams prm;
    double q = 0.0, tau = 0.0, kappa = 0.0, c = 0.0;
    Point x0{0.0, 0.0};
    std::array<bool, 2> pinned{false, false};
    Grid g;
    SpMat A;  // -Delta_h
    double cell = 0.0;
    Eigen::Index N = 0;
};

/// W = tau^2 V(x0 + (y + D)/tau) and its D-derivatives.
struct Ring {
    Vec W, T, nb;
    std::array<Vec, 2> dW;
    std::array<Vec, 3> d2W;  // 00, 01, 11
};

Ring ring_fields(const Frame& f, const Point& D) {
    Ring r;
    const auto N = f.N;
    r.W = Vec::Zero(N);
    r.T = Vec::Zero(N);
    r.nb = Vec::Zero(N);
    for (auto& v : r.dW) v = Vec::Zero(N);
    for (auto& v : r.d2W) v = Vec::Zero(N);
    if (!f.prm.trapped()) return r;
    const RingFrame F(f.x0, f.prm);
    const double b1s = f.prm.b1 * f.prm.b1, b2s = f.prm.b2 * f.prm.b2;
    for (int j = 0; j < f.g.ny; ++j)
        for (int i = 0; i < f.g.nx; ++i) {
            const auto k = Eigen::Index(j) * f.g.nx + i;
            const double s = (f.g.x(i) + D.x()) / f.tau, z = (f.g.y(j) + D.y()) / f.tau;
            const double off = F.offset(s, z);
            const double nb = f.prm.A + off;
            const double x1 = f.x0.x() + s, x2 = f.x0.y() + z;
            const double g1 = x1 / (b1s * nb), g2 = x2 / (b2s * nb);
            const double T = f.tau * off;
            r.T[k] = T;
            r.nb[k] = nb;
            r.W[k] = T * T;
            r.dW[0][k] = 2.0 * T * g1;
            r.dW[1][k] = 2.0 * T * g2;
            const double n3 = nb * nb * nb;
            const double h00 = 1.0 / (b1s * nb) - x1 * x1 / (b1s * b1s * n3);
            const double h01 = -x1 * x2 / (b1s * b2s * n3);
            const double h11 = 1.0 / (b2s * nb) - x2 * x2 / (b2s * b2s * n3);
            r.d2W[0][k] = 2.0 * g1 * g1 + 2.0 * T / f.tau * h00;
            r.d2W[1][k] = 2.0 * g1 * g2 + 2.0 * T / f.tau * h01;
            r.d2W[2][k] = 2.0 * g2 * g2 + 2.0 * T / f.tau * h11;
        }
    return r;
}

/// Average over the symmetries of a centred square grid.
void symmetrize(Vec& v, const Grid& g) {
    const int n = g.nx, m = g.ny;
    Vec out(v.size());
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) {
            const int ii = n - 1 - i, jj = m - 1 - j;
            auto at = [&](int a, int b) { return v[Eigen::Index(b) * n + a]; };
            double s = at(i, j) + at(ii, j) + at(i, jj) + at(ii, jj);
            double w = 4.0;
            if (n == m) {
                s += at(j, i) + at(jj, i) + at(j, ii) + at(jj, ii);
                w = 8.0;
            }
            out[Eigen::Index(j) * n + i] = s / w;
        }
    v = out;
}

struct PsiSolve {
    Vec psi;
    double nu0 = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

/// Discrete V = 0 soliton: -Delta psi - c psi^{q+1} = nu0 psi, ||psi|| = 1.
PsiSolve solve_psi(const Frame& f, Vec psi, int max_iter) {
    const double q = f.q, c = f.c, cell = f.cell;
    const auto N = f.N;
    psi /= std::sqrt(psi.squaredNorm() * cell);
    auto rayleigh = [&](const Vec& p) {
        return (p.dot(f.A * p) - c * p.array().abs().pow(q + 2.0).sum()) / p.squaredNorm();
    };
    double nu0 = rayleigh(psi);
    auto residual = [&](const Vec& p, double nu, Vec& F) {
        F = f.A * p - (c * p.array().abs().pow(q) * p.array()).matrix() - nu * p;
        const double m = p.squaredNorm() * cell - 1.0;
        return std::max(F.lpNorm<Eigen::Infinity>(), std::abs(m));
    };
    Vec F;
    double res = residual(psi, nu0, F);
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    int it = 0;
    for (; it < max_iter && res > 1e-11; ++it) {
        std::vector<Trip> t;
        t.reserve(std::size_t(f.A.nonZeros() + 3 * N));
        for (int k = 0; k < f.A.outerSize(); ++k)
            for (SpMat::InnerIterator e(f.A, k); e; ++e) t.emplace_back(e.row(), e.col(), e.value());
        for (Eigen::Index k = 0; k < N; ++k) {
            t.emplace_back(k, k, -(q + 1.0) * c * std::pow(std::abs(psi[k]), q) - nu0);
            t.emplace_back(k, N, -psi[k]);
            t.emplace_back(N, k, 2.0 * psi[k] * cell);
        }
        SpMat J(N + 1, N + 1);
        J.setFromTriplets(t.begin(), t.end());
        if (!analyzed) {
            lu.analyzePattern(J);
            analyzed = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "soliton Jacobian is singular");
        Vec rhs(N + 1);
        rhs.head(N) = F;
        rhs[N] = psi.squaredNorm() * cell - 1.0;
        const Vec d = lu.solve(rhs);
        Vec dp = d.head(N);
        symmetrize(dp, f.g);
        double lam = 1.0, best = res;
        Vec pn;
        double nun = nu0;
        for (; lam >= 1.0 / 64.0; lam *= 0.5) {
            pn = psi - lam * dp;
            nun = nu0 - lam * d[N];
            Vec Fn;
            const double r = residual(pn, nun, Fn);
            if (r < best || lam == 1.0 / 64.0) {
                best = r;
                F = Fn;
                break;
            }
        }
        const bool stalled = !(best < 0.5 * res) && res < 1e-9;
        psi = pn;
        nu0 = nun;
        res = best;
        if (stalled) {
            ++it;
            break;
        }
    }
    if (!(res < 1e-8)) throw Error(ErrorKind::NoConvergence, "V = 0 soliton Newton stalled at residual " + std::to_string(res));
    return {psi, nu0, it, res};
}

/// Unit-norm fourth-order central difference of psi along axis 0 or 1.
Vec translation_mode(const Frame& f, const Vec& psi, int axis) {
    const Field P(f.g, psi.array());
    Vec z(f.N);
    const double h = axis == 0 ? f.g.hx : f.g.hy;
    for (int j = 0; j < f.g.ny; ++j)
        for (int i = 0; i < f.g.nx; ++i) {
            const int di = axis == 0, dj = axis == 1;
            z[Eigen::Index(j) * f.g.nx + i] = (-P.at(i + 2 * di, j + 2 * dj) + 8.0 * P.at(i + di, j + dj) -
                                               8.0 * P.at(i - di, j - dj) + P.at(i - 2 * di, j - 2 * dj)) /
                                              (12.0 * h);
        }
    return z / std::sqrt(z.squaredNorm() * f.cell);
}

// Unknown layout: [eta (N), nu1, D1, D2, sigma1, sigma2].
struct System {
    const Frame& f;
    const Vec& psi;
    double nu0;
    std::array<Vec, 2> Z;

    static constexpr int extra = 5;

    Vec v_of(const Vec& X) const { return psi + f.kappa * X.head(f.N); }

    /// (|v|^q v - psi^{q+1}) / kappa without cancellation.
    Vec nonlinear(const Vec& eta) const {
        const double k = f.kappa, q = f.q;
        Vec out(f.N);
        for (Eigen::Index i = 0; i < f.N; ++i) {
            const double ps = psi[i], r = k * eta[i] / ps;
            if (ps > 0.0 && r > -1.0) {
                out[i] = std::pow(ps, q + 1.0) * std::expm1((q + 1.0) * std::log1p(r)) / k;
            } else {
                const double v = ps + k * eta[i];
                out[i] = (std::pow(std::abs(v), q) * v - std::pow(std::abs(ps), q) * ps) / k;
            }
        }
        return out;
    }

    Vec residual(const Vec& X, const Ring& R) const {
        const auto N = f.N;
        const Vec eta = X.head(N);
        const double nu1 = X[N];
        const Vec v = v_of(X);
        Vec out(N + extra);
        out.head(N) = f.A * eta - nu0 * eta - nu1 * v + (R.W.array() * v.array()).matrix() -
                      f.c * nonlinear(eta) + X[N + 3] * Z[0] + X[N + 4] * Z[1];
        out[N] = (2.0 * psi.array() * eta.array() + f.kappa * eta.array().square()).sum() * f.cell;
        out[N + 1] = Z[0].dot(eta) * f.cell;
        out[N + 2] = Z[1].dot(eta) * f.cell;
        const Vec v2 = v.array().square();
        for (int i = 0; i < 2; ++i)
            out[N + 3 + i] = f.pinned[i] ? X[N + 1 + i] : R.dW[i].dot(v2) * f.cell;
        return out;
    }

    SpMat jacobian(const Vec& X, const Ring& R) const {
        const auto N = f.N;
        const double nu1 = X[N];
        const Vec v = v_of(X);
        std::vector<Trip> t;
        t.reserve(std::size_t(f.A.nonZeros() + 12 * N));
        for (int k = 0; k < f.A.outerSize(); ++k)
            for (SpMat::InnerIterator e(f.A, k); e; ++e) t.emplace_back(e.row(), e.col(), e.value());
        const double k = f.kappa, c = f.c, q = f.q, cell = f.cell;
        for (Eigen::Index i = 0; i < N; ++i) {
            t.emplace_back(i, i, -nu0 - k * nu1 + k * R.W[i] - c * (q + 1.0) * std::pow(std::abs(v[i]), q));
            t.emplace_back(i, N, -v[i]);
            t.emplace_back(i, N + 1, R.dW[0][i] * v[i]);
            t.emplace_back(i, N + 2, R.dW[1][i] * v[i]);
            t.emplace_back(i, N + 3, Z[0][i]);
            t.emplace_back(i, N + 4, Z[1][i]);
            t.emplace_back(N, i, 2.0 * v[i] * cell);
            t.emplace_back(N + 1, i, Z[0][i] * cell);
            t.emplace_back(N + 2, i, Z[1][i] * cell);
            for (int a = 0; a < 2; ++a)
                if (!f.pinned[a]) t.emplace_back(N + 3 + a, i, 2.0 * k * R.dW[a][i] * v[i] * cell);
        }
        const Vec v2 = v.array().square();
        for (int a = 0; a < 2; ++a) {
            if (f.pinned[a]) {
                t.emplace_back(N + 3 + a, N + 1 + a, 1.0);
                continue;
            }
            for (int b = 0; b < 2; ++b) {
                const Vec& d2 = R.d2W[a + b];
                t.emplace_back(N + 3 + a, N + 1 + b, d2.dot(v2) * cell);
            }
        }
        SpMat J(N + extra, N + extra);
        J.setFromTriplets(t.begin(), t.end());
        return J;
    }

    double merit(const Vec& r) const {
        const auto N = f.N;
        return std::max(r.head(N).lpNorm<Eigen::Infinity>(), r.tail(extra).lpNorm<Eigen::Infinity>() / f.cell);
    }
};

Bracket classify(double excess, double K) {
    if (excess < 0.0) return Bracket::below;
    if (excess > K) return Bracket::above;
    return Bracket::inside;
}

std::string fmt_num(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

SolveReport solve_one(const SolveConfig& cfg, const ProblemParams& params, const RadialProfile& Q,
                      SolverState& st) {
    const RadialProfile prof = shoot_soliton(params.q);
    const SolitonConstants consts = soliton_constants(prof, Q);
    check_params(params, consts.a_star);

    Frame f;
    f.prm = params;
    f.q = params.q;
    f.tau = tau_q(params.a, consts);
    f.kappa = std::pow(f.tau, -4.0);
    f.c = 2.0 * consts.a_q_star / params.q;
    f.x0 = cfg.seed_x0 ? *cfg.seed_x0 : Point(params.b1 * params.A, 0.0);
    f.pinned = {!params.trapped(), !params.trapped() || f.x0.y() == 0.0};
    f.g = Grid::centered(Point(0, 0), cfg.L, cfg.L, cfg.n, cfg.n, cfg.stencil);
    f.A = neg_laplacian_matrix(f.g);
    f.cell = f.g.cell();
    f.N = f.g.size();
    const auto N = f.N;

    const bool warm = st.psi.values().size() > 0 && st.grid == f.g && st.eta.size() == N;
    double t_q = 1.0;
    Vec seed;
    if (warm) {
        seed = st.psi.values().matrix();
    } else {
        t_q = seed_dilation(params, prof, consts, f.x0);
        seed = sample(f.g, [&](const Point& y) { return t_q * prof(t_q * y.norm()); }).values().matrix();
    }
    const PsiSolve ps = solve_psi(f, seed, 60);

    System sys{f, ps.psi, ps.nu0, {translation_mode(f, ps.psi, 0), translation_mode(f, ps.psi, 1)}};
    Vec X = Vec::Zero(N + System::extra);
    if (warm) {
        X.head(N) = st.eta;
        X[N] = st.nu1;
        X[N + 1] = f.pinned[0] ? 0.0 : st.D_scaled.x() / f.tau;
        X[N + 2] = f.pinned[1] ? 0.0 : st.D_scaled.y() / f.tau;
    }

    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    int iterations = 0, clips = 0;
    double merit = 0.0;
    bool converged = false;
    for (;;) {
        Ring R = ring_fields(f, Point(X[N + 1], X[N + 2]));
        Vec r = sys.residual(X, R);
        merit = sys.merit(r);
        for (int it = 0; it < cfg.max_newton_iters; ++it) {
            if (merit < 0.01 * cfg.tol_residual) {
                converged = true;
                break;
            }
            const SpMat J = sys.jacobian(X, R);
            if (!analyzed) {
                lu.analyzePattern(J);
                analyzed = true;
            }
            lu.factorize(J);
            if (lu.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "bordered Jacobian is singular");
            const Vec d = lu.solve(r);
            ++iterations;
            double lam = 1.0;
            bool accepted = false;
            for (; lam >= cfg.damping_min; lam *= 0.5) {
                const Vec Xn = X - lam * d;
                Ring Rn = ring_fields(f, Point(Xn[N + 1], Xn[N + 2]));
                Vec rn = sys.residual(Xn, Rn);
                const double mn = sys.merit(rn);
                if (mn < merit) {
                    X = Xn;
                    R = std::move(Rn);
                    r = std::move(rn);
                    const bool small_gain = mn > 0.5 * merit;
                    merit = mn;
                    accepted = true;
                    if (small_gain && merit < cfg.tol_residual) converged = true;
                    break;
                }
            }
            if (converged) break;
            if (!accepted) {
                converged = merit < cfg.tol_residual;
                break;
            }
        }
        if (!converged && merit < cfg.tol_residual) converged = true;
        // negativity check; the sought state is positive
        const Vec v = sys.v_of(X);
        const double vmax = v.maxCoeff();
        if (v.minCoeff() < -1e-12 * vmax && clips < cfg.max_clip_resolves) {
            for (Eigen::Index i = 0; i < N; ++i)
                if (v[i] < 0.0) X[i] = -ps.psi[i] / f.kappa;
            ++clips;
            converged = false;
            continue;
        }
        break;
    }

    // ---- report ----
    auto rep = std::make_shared<SolveReport>();
    SolveReport& o = *rep;
    const Ring R = ring_fields(f, Point(X[N + 1], X[N + 2]));
    const Vec eta = X.head(N);
    const Vec v = sys.v_of(X);
    const double q = f.q, c = f.c, k = f.kappa, cell = f.cell, tau = f.tau;
    o.q = q;
    o.tau = tau;
    o.kappa = k;
    o.x0 = f.x0;
    o.D = Point(X[N + 1], X[N + 2]);
    o.x_c = f.x0 + o.D / tau;
    o.sigma = {X[N + 3], X[N + 4]};
    o.nu = ps.nu0 + k * X[N];
    o.mu_q = tau * tau * o.nu;
    o.v = Field(f.g, v.array());
    o.u_q = Field(Grid::centered(o.x_c, cfg.L / tau, cfg.L / tau, cfg.n, cfg.n, cfg.stencil), tau * v.array());

    const Vec Av = f.A * v;
    const double Ky = v.dot(Av) * cell;
    const double Py = v.array().abs().pow(q + 2.0).sum() * cell;
    const double WV = (R.W.array() * v.array().square()).sum() * cell;
    const Vec Apsi = f.A * ps.psi;
    o.c_h = 0.5 * ps.psi.dot(Apsi) * cell - c / (q + 2.0) * ps.psi.array().pow(q + 2.0).sum() * cell;
    o.c_tilde_scaled = (q - 2.0) / (2.0 * q);
    double dP = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
        const double p = ps.psi[i], r = k * eta[i] / p;
        dP += (p > 0.0 && r > -1.0) ? std::pow(p, q + 2.0) * std::expm1((q + 2.0) * std::log1p(r)) / k
                                    : (std::pow(std::abs(v[i]), q + 2.0) - std::pow(std::abs(p), q + 2.0)) / k;
    }
    o.excess_scaled = Apsi.dot(eta) * cell + 0.5 * k * eta.dot(f.A * eta) * cell + 0.5 * WV -
                      c / (q + 2.0) * dP * cell;
    o.energy.kinetic = 0.5 * tau * tau * Ky;
    o.energy.potential = 0.5 * WV / (tau * tau);
    o.energy.interaction = tau * tau * c / (q + 2.0) * Py;
    o.energy.total = tau * tau * o.c_h + o.excess_scaled / (tau * tau);
    o.grad_sq = tau * tau * Ky;
    o.eps_q = 1.0 / std::sqrt(o.grad_sq);
    o.mass = v.squaredNorm() * cell;
    o.min_value = o.u_q.values().minCoeff();

    const Vec direct = Av + k * (R.W.array() * v.array()).matrix() -
                       (c * v.array().abs().pow(q) * v.array()).matrix() - o.nu * v;
    o.residual_inf = direct.lpNorm<Eigen::Infinity>();
    o.pin_residual = k * (o.sigma[0] * sys.Z[0] + o.sigma[1] * sys.Z[1]).lpNorm<Eigen::Infinity>();
    const double ring = (R.T.array() * R.nb.array() * v.array().square()).sum() * cell / (tau * tau * tau);
    o.pohozaev_res = std::abs((Ky - c * q / (q + 2.0) * Py) - ring) / Ky;

    o.K_stmt = 0.5 * consts.second_moment;
    o.K_proof = consts.second_moment / (2.0 * params.b1 * params.b1);
    o.bracket_stmt = classify(o.excess_scaled, o.K_stmt);
    o.bracket_proof = classify(o.excess_scaled, o.K_proof);
    o.lambda1 = lambda1(params).value;
    o.iterations = iterations;
    o.psi_iterations = ps.iterations;
    o.clip_resolves = clips;
    o.t_q = t_q;
    o.threads = cfg.threads;
    o.converged = converged && o.residual_inf < cfg.tol_residual && merit < cfg.tol_residual;

    if (!o.converged)
        throw SolveFailure(ErrorKind::NoConvergence,
                           "Newton stopped at merit " + fmt_num(merit) + " after " + std::to_string(iterations) +
                               " iterations",
                           rep);
    if (o.min_value < -1e-12 * o.u_q.values().maxCoeff())
        throw SolveFailure(ErrorKind::WrongBranch, "solution changes sign after clipping", rep);
    const double Kmax = std::max(o.K_stmt, o.K_proof);
    if (o.pohozaev_res > cfg.tol_pohozaev)
        throw SolveFailure(ErrorKind::WrongBranch, "Pohozaev defect " + fmt_num(o.pohozaev_res) + " exceeds tol", rep);
    if (params.trapped() && (o.excess_scaled < -Kmax || o.excess_scaled > 4.0 * Kmax))
        throw SolveFailure(ErrorKind::WrongBranch,
                           "energy excess " + fmt_num(o.excess_scaled) + " is far outside the bracket", rep);

    st.q = q;
    st.grid = f.g;
    st.psi = Field(f.g, ps.psi.array());
    st.nu0 = ps.nu0;
    st.eta = eta;
    st.nu1 = X[N];
    st.D_scaled = o.D * tau;
    return o;
}

std::string q_tag(double q) {
    std::ostringstream os;
    os.precision(6);
    os << "q=" << q << ": ";
    return os.str();
}

SolveReport solve_tagged(const SolveConfig& cfg, const ProblemParams& params, const RadialProfile& Q,
                         SolverState& st) {
    try {
        return solve_one(cfg, params, Q, st);
    } catch (const SolveFailure& e) {
        throw SolveFailure(e.kind(), q_tag(params.q) + e.message(),
                           e.best() ? std::make_shared<const SolveReport>(*e.best()) : nullptr);
    } catch (const Error& e) {
        throw Error(e.kind(), q_tag(params.q) + e.message());
    }
}

}  // namespace

Field initial_guess(const ProblemParams& params, const RadialProfile& profile, const SolitonConstants& consts,
                    const Point& x0, const Grid& grid, double* t_q) {
    const double t = seed_dilation(params, profile, consts, x0);
    if (t_q) *t_q = t;
    Field w = rescaled_soliton(profile, tau_q(params.a, consts) * t, x0, grid);
    w.values() /= std::sqrt(mass(w));
    return w;
}

SolveReport solve(const SolveConfig& cfg, const ProblemParams& params, const RadialProfile& Q, SolverState* warm) {
    cfg.validate();
    SolverState local;
    SolverState& st = warm ? *warm : local;
    for (double qs : cfg.q_schedule) {
        if (!(qs > params.q)) continue;
        ProblemParams p = params;
        p.q = qs;
        solve_tagged(cfg, p, Q, st);
    }
    return solve_tagged(cfg, params, Q, st);
}

std::vector<SolveReport> continuation_sweep(const SolveConfig& cfg, const ProblemParams& params,
                                            const RadialProfile& Q, const std::vector<double>& q_list) {
    cfg.validate();
    for (std::size_t k = 0; k < q_list.size(); ++k) {
        if (!(q_list[k] > 2.0)) throw Error(ErrorKind::RangeError, "q_list: entries must exceed 2");
        if (k > 0 && !(q_list[k] < q_list[k - 1])) throw Error(ErrorKind::RangeError, "q_list: must be strictly decreasing");
    }
    SolverState st;
    std::vector<SolveReport> out;
    for (double q : q_list) {
        ProblemParams p = params;
        p.q = q;
        out.push_back(solve_tagged(cfg, p, Q, st));
    }
    return out;
}

FlowDiagnostic projected_gradient_flow(const Field& u0, const ProblemParams& params, int steps, double dt) {
    FlowDiagnostic d;
    d.u = u0;
    d.u.values() /= std::sqrt(mass(d.u));
    const auto& g = d.u.grid();
    const Point c = center_of_mass(d.u);
    for (int s = 0; s <= steps; ++s) {
        const Field tg = tangent_gradient(d.u, params);
        d.energy.push_back(energy(d.u, params).total);
        d.grad_norm.push_back(std::sqrt(mass(tg)));
        if (s == steps) break;
        // dilation direction u + (x - c).grad u, projected onto the tangent space
        Field sdir = sample(g, [](const Point&) { return 0.0; });
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double ux = (d.u.at(i + 1, j) - d.u.at(i - 1, j)) / (2.0 * g.hx);
                const double uy = (d.u.at(i, j + 1) - d.u.at(i, j - 1)) / (2.0 * g.hy);
                sdir(i, j) = d.u(i, j) + (g.x(i) - c.x()) * ux + (g.y(j) - c.y()) * uy;
            }
        sdir.values() -= inner(sdir, d.u) * d.u.values();
        const double sn = std::sqrt(mass(sdir));
        Field step = tg;
        if (sn > 0.0) {
            sdir.values() /= sn;
            step.values() -= 2.0 * inner(tg, sdir) * sdir.values();
        }
        d.u.values() -= dt * step.values();
        d.u.values() /= std::sqrt(mass(d.u));
    }
    return d;
}

}  // namespace gpx
