#pragma once

#include "clocktree/boundary_law.hpp"
#include "clocktree/constants.hpp"
#include "clocktree/subtree.hpp"

namespace clocktree {

/// 2x2 coarse-grained weight matrix, index 0 = A^c, 1 = A. Not stochastic.
///   m[0][0] = sup_{a in A^c} P(a, A^c) e^t     m[0][1] = sup_{a in A^c} P(a, A) e^t
///   m[1][0] = sup_{a in A}   P(a, A^c) e^t     m[1][1] = sup_{a in A} (P(a, A\{a}) e^t + P(a,a))
struct CoarseMatrix {
    double m[2][2] = {{0, 0}, {0, 0}};
    double t = 0.0;
};

CoarseMatrix coarse_matrix(const ChainSpec& spec, double t);

/// log of mu_A(e^{t |D_A(sigma) cap E(gamma)|}), by leaf-to-root dynamic
/// programming with per-vertex messages over Z_q.
double exact_moment_log(const ChainSpec& spec, const SubTree& gamma, double t);
double exact_moment(const ChainSpec& spec, const SubTree& gamma, double t);

/// log of the coarse-grained upper bound: messages over {0,1} with weights
/// from coarse_matrix and pi(1) = pi_A(A), pi(0) = pi_A(A^c).
double coarse_moment_log(const ChainSpec& spec, const SubTree& gamma, double t);
double coarse_moment(const ChainSpec& spec, const SubTree& gamma, double t);

struct OptimalT {
    double raw = 0.0;      // log( delta0 g / ((1 + d g) f - delta0 g f) )
    double clamped = 0.0;  // max(raw, 0); the Markov bound takes inf over t >= 0
};
OptimalT optimal_t(int gamma_size, const ConstantsBundle& bundle);

/// log of 2 C1 (f(beta) e^t + 1)^{1 + d |gamma|}.
double propagation_bound_log(int gamma_size, const ConstantsBundle& bundle, double t);

struct BadEventBound {
    double log_final = 0.0;    // log C4 - lambda(beta) |gamma|
    double log_closing = 0.0;  // log 2 C1 + (1 + d|gamma|) log((1+d)/delta0) + delta0 |gamma| log f
    double final_bound = 0.0;
    double closing_bound = 0.0;
    bool lambda_positive = false;
};

/// The two algebraically equal closed forms of the exponential tail bound
/// on mu_A(B_A(gamma)).
BadEventBound bad_event_bound(int gamma_size, const ConstantsBundle& bundle);

/// Exact mu_A(B_A(gamma)) = mu_A(|D_A cap E(gamma)| >= delta0 |gamma|) by
/// brute-force summation over (Z_q)^{gamma-bar}. Guard: |gamma-bar| <= 12,
/// throws SizeLimitError beyond it. delta0 |gamma| is compared literally,
/// no rounding.
double exact_bad_probability(const ChainSpec& spec, const SubTree& gamma, double delta0);

struct MEntryBound {
    const char* entry;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

/// Margins of the four coarse-matrix entry bounds at tilt t; reported, not
/// asserted (the M(1,0) constant has no slack for some models).
std::vector<MEntryBound> m_entry_bounds_report(const ChainSpec& spec,
                                               const ConstantsBundle& bundle, double t);

}  // namespace clocktree
