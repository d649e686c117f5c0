#pragma once

// Closed-form Gaussian functionals. Derivations live in
// docs/gaussian-moments.md; validate_gaussian_moments() re-checks every
// formula against quadrature and is run by the test suite (and can be called
// at program start for belt-and-braces builds).

namespace pdisc {

// E[min(|G|, t)^2] for t >= 0.
double min_sq(double t);

// E[(|G| - t)_+] for t >= 0.
double excess(double t);

// E[(kappa - rho*G)_+^2] for rho >= 0.
double hinge_sq(double kappa, double rho);

// E[exp(-s G) 1{G >= kappa}] = exp(s^2/2) * Phi(-(kappa + s)).
double exp_restricted(double s, double kappa);

// Compares each closed form with quadrature on a grid; returns the largest
// absolute discrepancy observed. Anything above 1e-8 is a build defect.
double validate_gaussian_moments();

}  // namespace pdisc
