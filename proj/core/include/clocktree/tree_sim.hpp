#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "clocktree/boundary_law.hpp"
#include "clocktree/constants.hpp"
#include "clocktree/stats.hpp"
#include "clocktree/subtree.hpp"

namespace clocktree {

/// Rooted rendering of the d-regular tree: the root has d+1 children, every
/// other interior vertex has d. Levels 0..depth; level `depth` is the
/// boundary layer on which conditioning happens.
class TruncatedTree {
public:
    TruncatedTree(int d, int depth);

    int branching() const { return d_; }
    int depth() const { return depth_; }
    int vertex_count() const { return level_offset_.back(); }
    int level_begin(int k) const { return level_offset_[k]; }
    int level_end(int k) const { return level_offset_[k + 1]; }
    int level_size(int k) const { return level_end(k) - level_begin(k); }
    int parent(int v) const;

private:
    int d_, depth_;
    std::vector<int> level_offset_;  // size depth+2
};

struct SpinConfiguration {
    std::vector<uint8_t> spins;  // indexed by tree vertex id
    uint64_t seed = 0;
};

/// Root drawn from pi_A, every child from P_A(parent, .). Deterministic
/// given the seed. forced_root >= 0 conditions on sigma_root = forced_root.
SpinConfiguration sample_broadcast(const ChainSpec& spec, const TruncatedTree& tree,
                                   uint64_t seed, int forced_root = -1);

/// Edges {x,y} with sigma_x != sigma_y, or an endpoint outside A.
std::vector<std::pair<int, int>> irregular_edges(const TruncatedTree& tree,
                                                 const std::vector<uint8_t>& spins,
                                                 const std::vector<int>& A);

/// Exact conditional root distribution given boundary spins at level
/// `depth`, by leaf-to-root messages m_v(i) ~ prod_c sum_j Q(i-j) m_c(j)
/// computed in the log domain.
std::vector<double> root_posterior(const ClockModel& model,
                                   const std::vector<uint8_t>& boundary, int depth);

/// Same posterior from the chain (pi_A, P_A) instead of the transfer
/// operator; identical for solved specs by the boundary-law equation.
std::vector<double> chain_root_posterior(const ChainSpec& spec,
                                         const std::vector<uint8_t>& boundary, int depth);

// ---------------------------------------------------------------------------
// Experiments. All are pure functions of (inputs, seed); per-sample seeds are
// derived with derive_seed so reports do not depend on the thread count.
// ---------------------------------------------------------------------------

struct BadProbReport {
    int gamma_size = 0;
    double delta0 = 0.0;
    int64_t samples = 0;
    uint64_t seed = 0;
    int64_t hits = 0;
    Interval estimate;  // Wilson
    double lemma31_bound = 0.0;
    bool lambda_positive = false;
    bool pass = false;  // estimate - halfwidth <= bound, or bound vacuous
    std::vector<double> per_sample;  // |D_A cap E(gamma)| per sample
};

/// Monte Carlo frequency of |D_A(omega) cap E(gamma)| >= delta0 |gamma|.
BadProbReport estimate_bad_probability(const ChainSpec& spec, const SubTree& gamma,
                                       double delta0, const ConstantsBundle& bundle,
                                       int64_t samples, uint64_t seed, int threads = 1);

struct ReconstructionReport {
    int a = 0;
    bool a_in_A = false;
    int depth = 0;
    int64_t samples = 0;
    uint64_t seed = 0;
    double eps1 = 0.0;
    double bound = 0.0;  // 2 |A| eps2
    bool bound_vacuous = false;
    int64_t failures = 0;
    Interval failure_freq;  // Wilson
    bool pass = false;      // freq - halfwidth <= bound
    // depth-convergence diagnostic: mean total-variation distance between
    // the posteriors at depth-1 and depth over a probe subset
    double tv_depth_change = 0.0;
    std::vector<double> per_sample;  // posterior mass on a per sample
};

/// Broadcast conditioned on sigma_root = a, read the level-depth boundary,
/// and count posterior(a) < 1 - eps1 failures.
ReconstructionReport reconstruction_experiment(const ChainSpec& spec, const ClockModel& model,
                                               const ConstantsBundle& bundle, int a, int depth,
                                               int64_t samples, uint64_t seed, int threads = 1);

struct ControlDecayReport {
    int a = 0;
    int min_depth = 0, max_depth = 0;
    int64_t samples = 0;
    uint64_t seed = 0;
    std::vector<double> mean_posterior;  // indexed min_depth..max_depth
    bool strictly_decreasing = false;
    std::vector<double> per_sample;  // [sample * ndepths + k]
};

/// Mean posterior mass on `a` across depths, one broadcast per sample reused
/// at every depth (common random numbers).
ControlDecayReport reconstruction_control(const ChainSpec& spec, const ClockModel& model,
                                          int a, int min_depth, int max_depth,
                                          int64_t samples, uint64_t seed, int threads = 1);

struct EaReport {
    int depth = 0;
    int64_t samples = 0;
    uint64_t seed = 0;
    double estimate = 0.0;  // (1/q) sum_a Var(posterior_a)
    double jackknife_se = 0.0;
    Interval ci;
    double lower_bound = 0.0;  // (1/2q)((1-eps1)^2 (1 - 2|A| eps2) - (|A|-1)/|A|)
    bool positive = false;     // ci.lo > 0
    std::vector<std::vector<double>> per_sample_posterior;
};

EaReport ea_parameter(const ChainSpec& spec, const ConstantsBundle& bundle, int depth,
                      int64_t samples, uint64_t seed, int threads = 1);

struct ThinnedBranch {
    int n = 0;                  // |Lambda_n^r| = n^2 vertices
    std::vector<int> spacings;  // size n^2 - 1, nondecreasing positive
    int span() const;           // sum of spacings
};

/// Default spacings r_i = ceil(i / kappa).
ThinnedBranch make_thinned_branch(int n, int kappa);

struct OverlapReport {
    int n = 0;
    std::vector<int> spacings;
    int tube_depth = 0;
    int64_t samples = 0;
    uint64_t seed = 0;
    Interval same_mean;
    double same_bound = 0.0;  // 1 - eps1 - eps2
    bool same_pass = false;   // mean >= bound - halfwidth
    Interval pair_mean;
    double pair_target = 0.0;  // sum_a pi_A(a)^2
    bool pair_pass = false;    // target inside the CI
    std::vector<double> per_sample_same, per_sample_pair;
};

/// (a) broadcast omega on the tube around the branch, draw sigma exactly
/// from the posterior given omega's tube boundary, record the match
/// fraction on the branch; (b) match fraction of two independent omegas.
OverlapReport overlap_experiment(const ChainSpec& spec, const ClockModel& model,
                                 const ConstantsBundle& bundle, const ThinnedBranch& branch,
                                 int tube_depth, int64_t samples, uint64_t seed,
                                 int threads = 1);

struct CovariancePoint {
    int distance = 0;
    double mean_u = 0.0, mean_v = 0.0;
    double cov = 0.0;
    std::vector<uint8_t> xu, xv;  // per-sample indicators
};

struct CovarianceReport {
    std::vector<int> distances;
    int radius = 0;
    double delta0 = 0.0;
    int64_t samples = 0;
    uint64_t seed = 0;
    int contours_per_site = 0;
    double variance = 0.0;  // Cov(u,u)
    std::vector<CovariancePoint> points;
    double slope = 0.0;  // least-squares on log|cov| vs distance
    bool slope_valid = false;
};

/// Covariances of radius-truncated bad events at the given distances.
CovarianceReport covariance_decay(const ChainSpec& spec, int d,
                                  const std::vector<int>& distances, int radius,
                                  double delta0, int64_t samples, uint64_t seed,
                                  int threads = 1);

}  // namespace clocktree
