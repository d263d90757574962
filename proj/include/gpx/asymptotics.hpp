#pragma once

// Blow-up rescaling of converged states and the q -> 2+ convergence tables.

#include <string>
#include <vector>

#include "gpx/solver.hpp"

namespace gpx {

/// argmax |u| refined by a three-point quadratic fit per axis. MultiPeak if
/// another local maximum exceeds a third of the peak.
Point concentration_point(const Field& u);

struct BlowupRecord {
    double q = 0.0;
    double tau = 0.0;
    double eps = 0.0;           // ||grad u||^{-1}
    Point x_c{0.0, 0.0};
    double profile_err_L2 = 0.0;  // || eps u(eps . + x_c) - Q/||Q|| ||_2
    double rescaled_mass = 0.0;
    double beta_hat = 1.0;      // L2-best beta in beta Q(beta .)/||Q||
    double beta_err_L2 = 0.0;
    double ring_defect = 0.0;   // tau | |x_c|_b - A |
    double grad_ratio = 0.0;    // ||grad u||^2 / tau^2
    double mu_scaled = 0.0;     // eps^2 mu
    double eps_pow = 0.0;       // eps^{q-2}, tends to a/a*
    double t_k = 0.0;           // Qtilde root of u
    double c0_analog = 0.0;     // (|x_c|_b - A t_k) / (eps t_k), report only
};

/// mu defaults to the Rayleigh quotient of u.
BlowupRecord blowup_rescale(const Field& u, const RadialProfile& Q, const ProblemParams& p, double tau,
                            std::optional<double> mu = std::nullopt);
BlowupRecord blowup_rescale(const SolveReport& r, const RadialProfile& Q, const ProblemParams& p);

enum class Verdict { inside_proof, inside_stmt, below, above };
const char* to_string(Verdict v);

struct BracketCheck {
    Verdict verdict = Verdict::inside_proof;
    double excess = 0.0;        // tau^2 (E - tau^2 c_h)
    double K_stmt = 0.0, K_proof = 0.0;
    double lower_offset = 0.0;  // c_h - (q-2)/(2q): discrete offset of the reference level
};

BracketCheck energy_bracket_check(const SolveReport& r, const SolitonConstants& c);

struct TrendViolation {
    std::string column;
    std::string detail;
};

struct ConvergenceTable {
    std::vector<BlowupRecord> rows;
    std::vector<BracketCheck> brackets;
    double C1 = 0.0;          // min K / ((q-2) tau^2)
    double C2 = 0.0;          // max (K - tau^2)(q-2)
    bool C2_slack = false;    // C2 <= 0: the upper bound holds for every C2 > 0
    std::vector<TrendViolation> violations;
};

/// Rows per report plus the fitted gradient-sandwich constants and monotone-trend checks.
ConvergenceTable convergence_table(const std::vector<SolveReport>& reports, const RadialProfile& Q,
                                   const ProblemParams& p);

/// Fitted constants agree within a factor of two (slack C2 on both sides counts as agreeing).
bool constants_stable(const ConvergenceTable& a, const ConvergenceTable& b);

}  // namespace gpx
