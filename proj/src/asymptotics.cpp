#include "gpx/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gpx {

Point concentration_point(const Field& u) {
    const auto& g = u.grid();
    const Field::Array a = u.values().abs();
    Eigen::Index kmax = 0;
    const double peak = a.maxCoeff(&kmax);
    if (!(peak > 0.0)) throw Error(ErrorKind::MultiPeak, "field has no peak");
    const int i0 = int(kmax % g.nx), j0 = int(kmax / g.nx);
    // second-highest strict local maximum away from the main peak
    double second = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (std::abs(i - i0) <= 1 && std::abs(j - j0) <= 1) continue;
            const double v = std::abs(u(i, j));
            if (v <= second) continue;
            bool is_max = true;
            for (int dj = -1; dj <= 1 && is_max; ++dj)
                for (int di = -1; di <= 1; ++di)
                    if ((di || dj) && std::abs(u.at(i + di, j + dj)) >= v) {
                        is_max = false;
                        break;
                    }
            if (is_max) second = v;
        }
    if (second * 3.0 > peak)
        throw Error(ErrorKind::MultiPeak, "secondary maximum " + std::to_string(second) + " vs peak " + std::to_string(peak));
    auto fit = [](double m, double c, double p) {
        const double den = m - 2.0 * c + p;
        return den < 0.0 ? 0.5 * (m - p) / den : 0.0;
    };
    const double dx = fit(std::abs(u.at(i0 - 1, j0)), peak, std::abs(u.at(i0 + 1, j0)));
    const double dy = fit(std::abs(u.at(i0, j0 - 1)), peak, std::abs(u.at(i0, j0 + 1)));
    return {g.x(i0) + dx * g.hx, g.y(j0) + dy * g.hy};
}

namespace {

double norm_sq(const RadialProfile& Q) {
    return radial_integral(Q, [&](std::size_t k) { return Q.u[k] * Q.u[k]; });
}

/// || eps u(eps . + x_c) - beta Q(beta .)/||Q|| ||^2, summed on the solution grid.
double profile_err_sq(const Field& u, const RadialProfile& Q, double nQ, const Point& xc, double eps, double beta) {
    const auto& g = u.grid();
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double r = std::hypot(g.x(i) - xc.x(), g.y(j) - xc.y()) / eps;
            const double d = eps * u(i, j) - beta * Q(beta * r) / nQ;
            s += d * d;
        }
    return s * g.cell() / (eps * eps);
}

double ring_offset(const Point& x, const ProblemParams& p) {
    const RingFrame f(x, p);
    return f.defect / (std::sqrt(p.A * p.A + f.defect) + p.A);
}

}  // namespace

BlowupRecord blowup_rescale(const Field& u, const RadialProfile& Q, const ProblemParams& p, double tau,
                            std::optional<double> mu) {
    BlowupRecord b;
    b.q = p.q;
    b.tau = tau;
    const double K = grad_norm_sq(u);
    b.eps = 1.0 / std::sqrt(K);
    b.x_c = concentration_point(u);
    const double nQ = std::sqrt(norm_sq(Q));
    b.profile_err_L2 = std::sqrt(profile_err_sq(u, Q, nQ, b.x_c, b.eps, 1.0));
    b.rescaled_mass = mass(u);  // eps u(eps . + x_c) has the same L2 norm
    const auto best = golden_max([&](double beta) { return -profile_err_sq(u, Q, nQ, b.x_c, b.eps, beta); }, 0.5, 2.0,
                                 1e-8);
    b.beta_hat = best.t;
    b.beta_err_L2 = std::sqrt(std::max(0.0, -best.value));
    b.ring_defect = tau * std::abs(ring_offset(b.x_c, p));
    b.grad_ratio = K / (tau * tau);
    b.mu_scaled = b.eps * b.eps * (mu ? *mu : rayleigh_mu(u, p));
    b.eps_pow = std::pow(b.eps, p.q - 2.0);
    if (p.q > 2.0) {
        b.t_k = qtilde_root(u, p.a, p.q);
        const double nb = p.A + ring_offset(b.x_c, p);
        b.c0_analog = (nb - p.A * b.t_k) / (b.eps * b.t_k);
    }
    return b;
}

BlowupRecord blowup_rescale(const SolveReport& r, const RadialProfile& Q, const ProblemParams& p) {
    ProblemParams pq = p;
    pq.q = r.q;
    return blowup_rescale(r.u_q, Q, pq, r.tau, r.mu_q);
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::inside_proof: return "inside_proof";
        case Verdict::inside_stmt: return "inside_stmt";
        case Verdict::below: return "below";
        case Verdict::above: return "above";
    }
    return "?";
}

BracketCheck energy_bracket_check(const SolveReport& r, const SolitonConstants& c) {
    BracketCheck b;
    b.excess = r.excess_scaled;
    b.K_stmt = 0.5 * c.second_moment;
    b.K_proof = r.K_proof > 0.0 ? r.K_proof : b.K_stmt;
    b.lower_offset = r.c_h - r.c_tilde_scaled;
    if (b.excess < 0.0) b.verdict = Verdict::below;
    else if (b.excess <= b.K_proof) b.verdict = Verdict::inside_proof;
    else if (b.excess <= b.K_stmt) b.verdict = Verdict::inside_stmt;
    else b.verdict = Verdict::above;
    return b;
}

namespace {

std::string num(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

/// Reports the first index where f(rows[k]) fails to drop strictly.
void check_decreasing(const std::vector<BlowupRecord>& rows, const char* column, double (*f)(const BlowupRecord&),
                      std::vector<TrendViolation>& out) {
    for (std::size_t k = 1; k < rows.size(); ++k)
        if (!(f(rows[k]) < f(rows[k - 1]))) {
            out.push_back({column, "not strictly decreasing at q=" + num(rows[k].q) + " (" + num(f(rows[k - 1])) +
                                       " -> " + num(f(rows[k])) + ")"});
            return;
        }
}

}  // namespace

ConvergenceTable convergence_table(const std::vector<SolveReport>& reports, const RadialProfile& Q,
                                   const ProblemParams& p) {
    ConvergenceTable t;
    if (reports.size() < 3) throw Error(ErrorKind::DomainError, "convergence_table needs at least 3 reports");
    std::vector<const SolveReport*> sorted;
    for (const auto& r : reports) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->q > b->q; });
    const double Qn2 = norm_sq(Q);
    t.C1 = std::numeric_limits<double>::infinity();
    t.C2 = -std::numeric_limits<double>::infinity();
    for (const SolveReport* r : sorted) {
        t.rows.push_back(blowup_rescale(*r, Q, p));
        SolitonConstants c;
        c.second_moment = 2.0 * r->K_stmt;
        t.brackets.push_back(energy_bracket_check(*r, c));
        const double K = r->grad_sq, tau2 = r->tau * r->tau, qm = r->q - 2.0;
        t.C1 = std::min(t.C1, K / (qm * tau2));
        t.C2 = std::max(t.C2, (K - tau2) * qm);
    }
    t.C2_slack = !(t.C2 > 0.0);

    auto& v = t.violations;
    check_decreasing(t.rows, "ring_defect", [](const BlowupRecord& b) { return b.ring_defect; }, v);
    check_decreasing(t.rows, "profile_err_L2", [](const BlowupRecord& b) { return b.profile_err_L2; }, v);
    check_decreasing(t.rows, "grad_ratio", [](const BlowupRecord& b) { return std::abs(b.grad_ratio - 1.0); }, v);
    check_decreasing(t.rows, "beta_hat", [](const BlowupRecord& b) { return std::abs(b.beta_hat - 1.0); }, v);
    const double ratio = p.a / Qn2;  // a / a*
    for (std::size_t k = 1; k < t.rows.size(); ++k)
        if (!(std::abs(t.rows[k].eps_pow - ratio) < std::abs(t.rows[k - 1].eps_pow - ratio))) {
            v.push_back({"eps_pow", "eps^(q-2) does not approach a/a* at q=" + num(t.rows[k].q)});
            break;
        }
    for (const auto& b : t.rows)
        if (!(b.mu_scaled < 0.0)) v.push_back({"mu_scaled", "non-negative at q=" + num(b.q)});
    for (std::size_t k = 1; k < t.rows.size(); ++k) {
        const auto& a = t.rows[k - 1];
        const auto& b = t.rows[k];
        if (!((b.q - 2.0) * b.tau * b.tau > (a.q - 2.0) * a.tau * a.tau)) {
            v.push_back({"scale_separation", "(q-2) tau^2 does not grow at q=" + num(b.q)});
            break;
        }
    }
    return t;
}

bool constants_stable(const ConvergenceTable& a, const ConvergenceTable& b) {
    auto within2 = [](double x, double y) { return x > 0.0 && y > 0.0 && x <= 2.0 * y && y <= 2.0 * x; };
    if (!within2(a.C1, b.C1)) return false;
    if (a.C2_slack && b.C2_slack) return true;
    return within2(a.C2, b.C2);
}

}  // namespace gpx
