#pragma once

#include <string>
#include <vector>

#include "clocktree/constants.hpp"
#include "clocktree/model.hpp"

namespace clocktree {

/// Fixed point of u = c (Q * u)^d, normalized so max entry = 1.
struct BoundaryLaw {
    std::vector<double> log_u;
    std::vector<double> u;
    double residual = 0.0;  // max-norm gap to the renormalized image
    int iterations = 0;
};

/// Solved A-localized chain: single-site marginal pi_A and transition
/// matrix P_A of the tree-indexed Markov chain mu_A.
struct ChainSpec {
    std::vector<int> A;
    std::vector<double> pi;
    std::vector<double> log_pi;
    std::vector<std::vector<double>> P;
    std::vector<std::vector<double>> log_P;
    double lambda2 = 0.0;
    double residual = 0.0;

    int q() const { return static_cast<int>(pi.size()); }
    bool in_A(int i) const;
    double pi_outside() const;
};

/// Damped normalized iteration u <- (Q*u)^d / max, started from the
/// indicator of A, in the log domain. Throws NoConvergenceError, or
/// WrongBranchError when the reached fixed point is not A-localized
/// (beta too small for this A).
BoundaryLaw solve_boundary_law(const ClockModel& model, const std::vector<int>& A,
                               double tol = 1e-13, int max_iter = 100000);

/// pi_A(i) proportional to u_A(i)^{(d+1)/d}.
std::vector<double> marginal_from_law(const BoundaryLaw& law, int d);

/// P_A(i,j) = pi_A(j)^{d/(d+1)} Q(i-j) / (Q * pi_A^{d/(d+1)})(i).
std::vector<std::vector<double>> transition_matrix(const ClockModel& model,
                                                   const std::vector<double>& pi);

/// Second largest eigenvalue modulus of P, via power iteration on the
/// detailed-balance-symmetrized matrix with the top eigenvector deflated.
double spectral_gap(const std::vector<std::vector<double>>& P,
                    const std::vector<double>& pi);

/// Full pipeline: solve the law, build pi_A and P_A, compute lambda2.
ChainSpec solve_chain(const ClockModel& model, const std::vector<int>& A,
                      double tol = 1e-13, int max_iter = 100000);

struct LocalizationBound {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool lower_side = false;  // pass means lhs >= rhs
    bool pass = false;
    double margin = 0.0;  // signed distance to the bound
};

/// Pass/fail report for the four transition/marginal bounds (i)-(iv).
struct LocalizationReport {
    double epsilon = 0.0;
    double eta = 0.0;
    bool conditioned = false;  // epsilon <= eta(d, n)
    std::vector<LocalizationBound> bounds;
    bool all_pass = false;
};

LocalizationReport verify_localization(const ChainSpec& spec, const ClockModel& model,
                                       const ConstantsBundle& bundle);

}  // namespace clocktree
