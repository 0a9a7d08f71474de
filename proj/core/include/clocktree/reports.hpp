#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clocktree/boundary_law.hpp"
#include "clocktree/coarse_bound.hpp"
#include "clocktree/tree_sim.hpp"

namespace clocktree {

/// Run configuration: model plus experiment knobs. Flags mirror JSON keys
/// one-to-one; stochastic commands require an explicit seed.
struct RunConfig {
    int q = 0, d = 0;
    double beta = 0.0;
    std::vector<double> ubar;
    std::vector<int> A;

    std::string experiment;  // reconstruct | ea | overlap | badprob | covdecay
    int depth = 8;
    int64_t samples = 2000;
    std::optional<uint64_t> seed;
    double tol = 1e-13;
    int max_iter = 100000;
    int threads = 1;

    // bounds command
    std::vector<int> gamma_sizes = {1, 2, 3, 4, 5, 8, 12, 20};
    std::vector<double> t_grid = {0.0, 0.5, 1.0, 2.0};

    // experiment extras
    int a = -1;             // reconstruct target; default first element of A
    int branch_n = 5;       // overlap
    int kappa = 8;          // overlap spacing scale
    int radius = 1;         // covdecay contour radius
    int gamma_size = 2;     // badprob subtree size
    std::vector<int> distances = {2, 4, 6, 8};
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Formats a double with 17 significant digits (round-trip exact).
std::string fmt17(double x);

std::string chain_spec_to_json(const ChainSpec& spec);
ChainSpec chain_spec_from_json(const std::string& json_text);

std::string localization_report_to_json(const LocalizationReport& rep,
                                        const ConstantsBundle& bundle);

std::string badprob_report_to_json(const BadProbReport& rep);
std::string reconstruction_report_to_json(const ReconstructionReport& rep,
                                          const ControlDecayReport* control);
std::string ea_report_to_json(const EaReport& rep);
std::string overlap_report_to_json(const OverlapReport& rep);
std::string covariance_report_to_json(const CovarianceReport& rep);

/// One CSV row of the domination chain.
struct BoundChainRow {
    int gamma_size = 0;
    double t = 0.0;
    bool has_exact = false;
    double exact_p = 0.0;        // only when |gamma-bar| <= 12
    double markov_bound = 0.0;   // e^{-t delta0 |g|} exact_moment
    double coarse_bound = 0.0;   // e^{-t delta0 |g|} coarse_moment
    double propagation_bound = 0.0;
    double lemma31_bound = 0.0;
    bool vacuous = false;  // lambda(beta) <= 0
    bool at_tstar = false;
};

std::string bound_chain_csv(const std::vector<BoundChainRow>& rows);

}  // namespace clocktree
