#pragma once

#include <vector>

namespace clocktree {

/// Z_q clock model on the d-regular tree (every vertex has d+1 neighbors).
/// The interaction table ubar is indexed by cyclic distance 0..q/2 with
/// ubar[0] = 0 and ubar[k] > 0 otherwise.
struct ClockModel {
    int q = 0;
    int d = 0;
    double beta = 0.0;
    std::vector<double> ubar;  // size q/2 + 1

    double u = 0.0;  // min_{k!=0} ubar(k)
    double U = 0.0;  // max_{k!=0} ubar(k)

    int cyclic_dist(int i, int j) const {
        int k = ((i - j) % q + q) % q;
        return std::min(k, q - k);
    }

    // log Q(k) = -beta * ubar(dist(k,0))
    double log_transfer(int k) const { return -beta * ubar[cyclic_dist(k, 0)]; }
};

/// Validates q >= 3, d >= 2, beta > 0, ubar(0) = 0, ubar(k) > 0, and the
/// admissibility condition (d^2+1) u > d U. Throws ModelError otherwise.
ClockModel build_model(int q, int d, double beta, std::vector<double> ubar);

/// Q(k) = exp(-beta ubar(dist(k,0))), k = 0..q-1. Q(0) = 1, Q(k) = Q(q-k).
std::vector<double> transfer_operator(const ClockModel& model);

/// epsilon = ||Q - 1_{0}||_{(d+1)/2} = (sum_{k!=0} Q(k)^{(d+1)/2})^{2/(d+1)}.
/// Verifies (q-1)^{2/(d+1)} e^{-beta U} <= eps <= (q-1)^{2/(d+1)} e^{-beta u}.
double epsilon_norm(const ClockModel& model);

struct EpsilonBounds {
    double lower = 0.0;  // (q-1)^{2/(d+1)} e^{-beta U}
    double upper = 0.0;  // (q-1)^{2/(d+1)} e^{-beta u}
};
EpsilonBounds epsilon_bounds(const ClockModel& model);

}  // namespace clocktree
