#pragma once

// Bordered Newton for the normalized excited state
//   -Delta u + V u - a|u|^q u = mu u,  ||u||_2 = 1,
// posed in the blow-up frame y = tau (x - x_c) around a concentration point.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gpx/functionals.hpp"
#include "gpx/radial.hpp"
#include "gpx/scaling.hpp"

namespace gpx {

struct SolveConfig {
    int n = 257;        // nodes per side (odd keeps a node on the concentration point)
    double L = 12.0;    // box half-width in units of 1/tau
    Stencil stencil = Stencil::fourth_order;
    double tol_residual = 1e-8;
    double tol_pohozaev = 1e-4;
    int max_newton_iters = 40;
    std::vector<double> q_schedule;  // strictly decreasing, solved before the target q
    double damping_min = 1.0 / 64.0;
    int max_clip_resolves = 2;
    std::optional<Point> seed_x0;  // defaults to (b1 A, 0)
    int threads = 1;

    void validate() const;
};

enum class Bracket { below, inside, above };
inline const char* to_string(Bracket b) { return b == Bracket::below ? "below" : b == Bracket::inside ? "inside" : "above"; }

struct SolveReport {
    double q = 0.0, tau = 0.0, kappa = 0.0;
    Field u_q;          // physical field on a grid of spacing h_y / tau centred at x_c
    Field v;            // the same solution in blow-up units, v(y) = u(x_c + y/tau)/tau
    double mu_q = 0.0;  // physical multiplier
    double nu = 0.0;    // mu_q / tau^2
    EnergyBreakdown energy;
    double residual_inf = 0.0;  // sup norm of the Euler-Lagrange residual in blow-up units
    double pin_residual = 0.0;  // part of it carried by the translation multipliers
    double pohozaev_res = 0.0;  // |Q_q(u)| / ||grad u||^2
    double eps_q = 0.0;
    double grad_sq = 0.0;       // ||grad u_q||^2
    double mass = 0.0;
    double min_value = 0.0;
    int iterations = 0;
    int psi_iterations = 0;
    int clip_resolves = 0;
    // energy bracket in blow-up units: excess = tau^2 (E - tau^2 c_h)
    double c_h = 0.0;       // discrete V = 0 level E_y(psi)
    double c_tilde_scaled = 0.0;  // (q-2)/(2q)
    double excess_scaled = 0.0;
    double K_stmt = 0.0, K_proof = 0.0;
    Bracket bracket_stmt = Bracket::inside, bracket_proof = Bracket::inside;
    Point x0{0.0, 0.0};
    Point x_c{0.0, 0.0};
    Point D{0.0, 0.0};  // x_c = x0 + D / tau
    std::array<double, 2> sigma{0.0, 0.0};
    double lambda1 = 0.0;
    double t_q = 1.0;   // dilation of the seed taken from the path maximizer
    int threads = 1;
    bool converged = false;

    bool in_bracket() const { return bracket_stmt == Bracket::inside || bracket_proof == Bracket::inside; }
};

/// Raised on NoConvergence / WrongBranch with the best iterate attached.
class SolveFailure : public Error {
public:
    SolveFailure(ErrorKind k, const std::string& what, std::shared_ptr<const SolveReport> best)
        : Error(k, what), best_(std::move(best)) {}
    const SolveReport* best() const { return best_.get(); }

private:
    std::shared_ptr<const SolveReport> best_;
};

/// w_q^{t_q} about x0 on the given grid, unit mass; t_q from the path maximizer
/// (the V = 0 maximizer t = 1 when the path geometry is not available).
Field initial_guess(const ProblemParams& params, const RadialProfile& profile, const SolitonConstants& consts,
                    const Point& x0, const Grid& grid, double* t_q = nullptr);

/// Warm-start data carried between continuation steps.
struct SolverState {
    double q = 0.0;
    Grid grid;
    Field psi;
    double nu0 = 0.0;
    Eigen::VectorXd eta;
    double nu1 = 0.0;
    Point D_scaled{0.0, 0.0};  // tau * D
};

/// Solves at params.q, first running through cfg.q_schedule entries above it.
/// Q is the q = 2 profile (for a*); the profile at each q is shot internally.
SolveReport solve(const SolveConfig& cfg, const ProblemParams& params, const RadialProfile& Q,
                  SolverState* warm = nullptr);

std::vector<SolveReport> continuation_sweep(const SolveConfig& cfg, const ProblemParams& params,
                                            const RadialProfile& Q, const std::vector<double>& q_list);

struct FlowDiagnostic {
    std::vector<double> energy, grad_norm;
    Field u;
};

/// Projected gradient flow on the unit sphere that descends in every direction
/// except the dilation direction, along which it ascends. Diagnostic only.
FlowDiagnostic projected_gradient_flow(const Field& u0, const ProblemParams& params, int steps, double dt);

}  // namespace gpx
