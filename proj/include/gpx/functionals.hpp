#pragma once

// Energy, its constrained gradient, Pohozaev functionals, and the
// Gagliardo-Nirenberg ratio, all on the shared midpoint quadrature.

#include <utility>

#include "gpx/fields.hpp"
#include "gpx/radial.hpp"

namespace gpx {

struct EnergyBreakdown {
    double kinetic = 0.0;      // (1/2) int |grad u|^2
    double potential = 0.0;    // (1/2) int V u^2
    double interaction = 0.0;  // a/(q+2) int |u|^{q+2}
    double total = 0.0;
};

Field potential_field(const Grid& g, const ProblemParams& p);

EnergyBreakdown energy(const Field& u, const ProblemParams& p);

/// -Delta u + V u - a |u|^q u, the L^2 gradient of the energy.
Field energy_gradient(const Field& u, const ProblemParams& p);

Field euler_lagrange_residual(const Field& u, double mu, const ProblemParams& p);

/// g - (<g,u>/<u,u>) g with g the energy gradient.
Field tangent_gradient(const Field& u, const ProblemParams& p);

/// Multiplier from the Rayleigh quotient: (int|grad u|^2 + int V u^2 - a int|u|^{q+2}) / int u^2.
double rayleigh_mu(const Field& u, const ProblemParams& p);

double pohozaev_Q(const Field& u, const ProblemParams& p);
double pohozaev_Qtilde(const Field& u, double a, double q);

/// The unique t > 0 with Qtilde(t u(t .)) = 0.
double qtilde_root(const Field& u, double a, double q);

/// int|u|^{q+2} / [ (q+2)/(2 a_q*) (int|grad u|^2)^{q/2} int u^2 ]
double gn_check(const Field& u, const SolitonConstants& c);

/// Both sides of q E(u) - Q_q(u) = (q-2)/2 K + (1/2) int [q V + 2|x|_b(|x|_b - A)] u^2.
std::pair<double, double> identity_321(const Field& u, const ProblemParams& p);

struct Lambda1 {
    double value = 0.0;
    int iterations = 0;
    Field mode;
};

/// Smallest eigenvalue of -Delta + V on the Dirichlet box [-L, L]^2, L = b1 A + margin,
/// by inverse power iteration.
Lambda1 lambda1(const ProblemParams& p, int n = 161, double margin = 5.0, double tol = 1e-10);

}  // namespace gpx
