#include "clocktree/model.hpp"

#include <cmath>
#include <string>

#include "clocktree/errors.hpp"

namespace clocktree {

ClockModel build_model(int q, int d, double beta, std::vector<double> ubar) {
    if (q < 3) throw ModelError("q must be >= 3, got " + std::to_string(q));
    if (d < 2) throw ModelError("d must be >= 2, got " + std::to_string(d));
    if (!(beta > 0.0)) throw ModelError("beta must be positive");
    const size_t want = static_cast<size_t>(q / 2) + 1;
    if (ubar.size() != want)
        throw ModelError("ubar must have q/2+1 = " + std::to_string(want) +
                         " entries (index = cyclic distance), got " +
                         std::to_string(ubar.size()));
    if (ubar[0] != 0.0) throw ModelError("ubar(0) must be 0 (normalization Q(0)=1)");

    double u = ubar[1], U = ubar[1];
    for (size_t k = 1; k < ubar.size(); ++k) {
        if (!(ubar[k] > 0.0))
            throw ModelError("ubar(" + std::to_string(k) + ") must be positive");
        u = std::min(u, ubar[k]);
        U = std::max(U, ubar[k]);
    }
    if (!((d * d + 1) * u > d * U))
        throw ModelError("inadmissible interaction: (d^2+1)u > dU violated, (d^2+1)u = " +
                         std::to_string((d * d + 1) * u) + " <= dU = " +
                         std::to_string(d * U));

    ClockModel m;
    m.q = q;
    m.d = d;
    m.beta = beta;
    m.ubar = std::move(ubar);
    m.u = u;
    m.U = U;
    return m;
}

std::vector<double> transfer_operator(const ClockModel& model) {
    std::vector<double> Q(model.q);
    for (int k = 0; k < model.q; ++k) Q[k] = std::exp(model.log_transfer(k));
    return Q;
}

EpsilonBounds epsilonBoundsImpl(const ClockModel& m) {
    const double pref = std::pow(m.q - 1.0, 2.0 / (m.d + 1));
    return {pref * std::exp(-m.beta * m.U), pref * std::exp(-m.beta * m.u)};
}

EpsilonBounds epsilon_bounds(const ClockModel& model) { return epsilonBoundsImpl(model); }

double epsilon_norm(const ClockModel& model) {
    // sum_{k!=0} Q(k)^{(d+1)/2} in the log domain: factor out the largest
    // term exp(-beta u (d+1)/2) so large beta cannot underflow the sum.
    const double p = 0.5 * (model.d + 1);
    double acc = 0.0;
    for (int k = 1; k < model.q; ++k)
        acc += std::exp(p * (model.log_transfer(k) + model.beta * model.u));
    const double eps = std::exp(-model.beta * model.u) * std::pow(acc, 1.0 / p);

    const auto [lo, hi] = epsilonBoundsImpl(model);
    const double slack = 1e-12 * hi;
    if (eps < lo - slack || eps > hi + slack)
        throw ModelError("epsilon outside the (q-1)^{2/(d+1)} e^{-beta U} .. e^{-beta u} sandwich");
    return eps;
}

}  // namespace clocktree
