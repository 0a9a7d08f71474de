#include "clocktree/constants.hpp"

#include <cmath>
#include <string>

#include "clocktree/errors.hpp"

namespace clocktree {

namespace {

double root_poly(int d, int n, double r) {
    return (d - 1) * std::pow(r, d + 1) + d * n * std::pow(r, d - 1) - n;
}

}  // namespace

double rho_root(int d, int n) {
    // Bracket: poly(0) = -n < 0 and poly(d^{-1/(d-1)}) = (d-1) rho_max^{d+1} > 0.
    double lo = 0.0, hi = std::pow(d, -1.0 / (d - 1));
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (root_poly(d, n, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double r = 0.5 * (lo + hi);
    if (std::abs(root_poly(d, n, r)) > 1e-10)
        throw ModelError("rho bisection residual above 1e-10");
    return r;
}

EtaPair eta_quantities(int d, int n) {
    const double r = rho_root(d, n);
    EtaPair out;
    out.eta = (r - std::pow(r, d)) / std::pow(std::pow(r, d + 1) + n, d / (d + 1.0));
    out.eta0 = std::pow(d, -1.0 / (d - 1)) * (1.0 - 1.0 / d) *
               std::pow(n + 1.0, -d / (d + 1.0));
    if (!(out.eta0 < out.eta && out.eta < 1.0))
        throw ModelError("eta quantities violate eta0 < eta < 1 for d=" +
                         std::to_string(d) + ", n=" + std::to_string(n));
    return out;
}

ConstantsBundle constants(const ClockModel& model, int n) {
    if (n < 1 || n > model.q)
        throw ModelError("localization size n must satisfy 1 <= n <= q");

    ConstantsBundle b;
    b.q = model.q;
    b.d = model.d;
    b.n = n;
    b.beta = model.beta;
    b.u = model.u;
    b.U = model.U;

    const double d = model.d, q = model.q;
    b.rho = rho_root(model.d, n);
    const auto ep = eta_quantities(model.d, n);
    b.eta = ep.eta;
    b.eta0 = ep.eta0;

    b.c1 = std::pow(b.rho / b.eta, d - 1.0);
    b.c2 = d * (std::pow(d, 1.0 / (d - 1.0)) - 1.0) * std::pow(n + 1.0, d / (d + 1.0));
    b.c3 = std::pow(d, (d + 1.0) / (d - 1.0)) * std::pow(b.c1, (d + 1.0) / (d - 1.0)) / n;
    b.c4 = (d + 1.0) / (d - 1.0) * b.c2;
    b.c5 = std::pow(b.c1, (d + 1.0) / (d - 1.0)) / n + b.c4;

    b.C1 = std::pow(2.0, d + 1.0) * d * d * d * std::pow(n + 1.0, d) * (q - 1.0) * (q - 1.0);
    b.C2 = 3.0 * d * (std::pow(d, 1.0 / (d - 1.0)) - 1.0) * (n + 1.0) * (q - 1.0);
    b.C3 = 2.0 * (q - 1.0);

    b.delta0 = 0.5 * (d - 1.0) * b.u / (b.u + b.U);
    b.c = std::min((d * d + 1.0) * b.u / d - b.U, 1.0 / d);
    b.C4 = 2.0 * b.C1 * (d + 1.0) / b.delta0;
    b.C5 = 2.0 * (q - 1.0) * b.C4;
    b.c_tilde = d * std::log(b.delta0) - d * std::log(d + 1.0) - b.delta0 * std::log(b.C1 + 2.0 * b.C3);
    b.lambda_beta = b.c_tilde + b.c * b.delta0 * b.beta;
    b.eps1 = b.C3 * std::exp(-0.5 * (d - 1.0) * b.beta * b.u);
    b.eps2 = b.C5 * std::exp(-b.lambda_beta);
    b.f_beta = (2.0 * b.C3 + b.C1) * std::exp(-b.c * b.beta);

    b.lambda_positive = b.lambda_beta > 0.0;
    b.eps2_vacuous = b.eps2 >= 1.0;
    return b;
}

}  // namespace clocktree
