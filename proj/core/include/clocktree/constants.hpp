#pragma once

#include <cmath>

#include "clocktree/model.hpp"

namespace clocktree {

/// Unique positive root of (d-1) r^{d+1} + d n r^{d-1} - n = 0, located by
/// bisection in (0, d^{-1/(d-1)}) to absolute tolerance 1e-12.
double rho_root(int d, int n);

struct EtaPair {
    double eta = 0.0;   // (rho - rho^d) / (rho^{d+1} + n)^{d/(d+1)}
    double eta0 = 0.0;  // d^{-1/(d-1)} (1 - 1/d) (n+1)^{-d/(d+1)}
};

/// Computes eta and eta0 and checks eta0 < eta < 1.
EtaPair eta_quantities(int d, int n);

/// Every closed-form constant attached to a model and a localization size n.
struct ConstantsBundle {
    int q = 0, d = 0, n = 0;
    double beta = 0.0, u = 0.0, U = 0.0;

    double rho = 0.0, eta = 0.0, eta0 = 0.0;
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0;
    double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0, C5 = 0.0;

    double delta0 = 0.0;       // (1/2)(d-1)u/(u+U), in (0, d)
    double c = 0.0;            // min{(d^2+1)u/d - U, 1/d}
    double c_tilde = 0.0;      // d log delta0 - d log(d+1) - delta0 log(C1 + 2 C3)
    double lambda_beta = 0.0;  // c_tilde + c delta0 beta
    double eps1 = 0.0;         // C3 e^{-(d-1) beta u / 2}
    double eps2 = 0.0;         // C5 e^{-lambda(beta)}
    double f_beta = 0.0;       // (2 C3 + C1) e^{-c beta}

    // Vacuity flags, reported rather than rejected.
    bool lambda_positive = false;
    bool eps2_vacuous = false;  // eps2 >= 1

    double lambda_at(double b) const { return c_tilde + c * delta0 * b; }
    double f_at(double b) const { return (2.0 * C3 + C1) * std::exp(-c * b); }
};

/// Evaluates the bundle for an admissible model and 1 <= n <= q.
ConstantsBundle constants(const ClockModel& model, int n);

}  // namespace clocktree
