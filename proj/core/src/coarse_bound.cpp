#include "clocktree/coarse_bound.hpp"

#include <cmath>
#include <string>

#include "clocktree/errors.hpp"
#include "clocktree/numeric.hpp"

namespace clocktree {

CoarseMatrix coarse_matrix(const ChainSpec& spec, double t) {
    const int q = spec.q();
    CoarseMatrix M;
    M.t = t;
    const double et = std::exp(t);
    for (int a = 0; a < q; ++a) {
        double toA = 0.0, toAc = 0.0;
        for (int j = 0; j < q; ++j) (spec.in_A(j) ? toA : toAc) += spec.P[a][j];
        if (spec.in_A(a)) {
            M.m[1][0] = std::max(M.m[1][0], toAc * et);
            M.m[1][1] = std::max(M.m[1][1], (toA - spec.P[a][a]) * et + spec.P[a][a]);
        } else {
            M.m[0][0] = std::max(M.m[0][0], toAc * et);
            M.m[0][1] = std::max(M.m[0][1], toA * et);
        }
    }
    return M;
}

namespace {

// Shared DP skeleton: parent[v] < v, so a reverse sweep visits children
// before parents. Messages are in the log domain.
template <typename Msg>
double tree_dp(const SubTree& g, const std::vector<double>& log_root_weight,
               const Msg& edge_term, const std::vector<double>& log_boundary_factor) {
    const int m = g.size();
    const int nstates = static_cast<int>(log_root_weight.size());
    std::vector<std::vector<double>> msg(m, std::vector<double>(nstates, 0.0));
    for (int v = m - 1; v >= 0; --v) {
        auto& mv = msg[v];
        const int fs = g.free_slots(v);
        for (int s = 0; s < nstates; ++s)
            mv[s] = fs > 0 ? fs * log_boundary_factor[s] : 0.0;
        for (int c : g.children(v))
            for (int s = 0; s < nstates; ++s) mv[s] += edge_term(s, msg[c]);
        // rescale to keep messages bounded on deep subtrees
        double mmax = kNegInf;
        for (double x : mv) mmax = std::max(mmax, x);
        // mmax can be -inf only if a state is impossible everywhere; keep as is
        if (mmax != kNegInf && mmax != 0.0) {
            for (double& x : mv) x -= mmax;
            msg[v].push_back(mmax);  // stash the scale in an extra slot
        } else {
            msg[v].push_back(0.0);
        }
    }
    // collect scales: every vertex contributed its stashed rescale once
    double scale = 0.0;
    for (int v = 0; v < m; ++v) scale += msg[v][nstates];
    std::vector<double> top(nstates);
    for (int s = 0; s < nstates; ++s) top[s] = log_root_weight[s] + msg[0][s];
    return log_sum_exp(top) + scale;
}

}  // namespace

double exact_moment_log(const ChainSpec& spec, const SubTree& gamma, double t) {
    if (gamma.size() > 10000)
        throw SizeLimitError("exact_moment accepts |gamma| <= 10^4");
    const int q = spec.q();
    // tilt(a,b) = t when {a,b} is A-irregular
    std::vector<std::vector<double>> w(q, std::vector<double>(q));
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b) {
            const bool irr = (a != b) || !spec.in_A(a) || !spec.in_A(b);
            w[a][b] = spec.log_P[a][b] + (irr ? t : 0.0);
        }
    std::vector<double> lb(q);
    for (int a = 0; a < q; ++a) lb[a] = log_sum_exp(w[a]);

    auto edge_term = [&](int s, const std::vector<double>& child) {
        std::vector<double> terms(q);
        for (int sc = 0; sc < q; ++sc) terms[sc] = w[s][sc] + child[sc];
        return log_sum_exp(terms);
    };
    return tree_dp(gamma, spec.log_pi, edge_term, lb);
}

double exact_moment(const ChainSpec& spec, const SubTree& gamma, double t) {
    return std::exp(exact_moment_log(spec, gamma, t));
}

double coarse_moment_log(const ChainSpec& spec, const SubTree& gamma, double t) {
    const CoarseMatrix M = coarse_matrix(spec, t);
    std::vector<std::vector<double>> lM(2, std::vector<double>(2));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            lM[a][b] = M.m[a][b] > 0.0 ? std::log(M.m[a][b]) : kNegInf;

    double piA = 0.0;
    for (int a : spec.A) piA += spec.pi[a];
    std::vector<double> lpi = {spec.pi_outside() > 0.0 ? std::log(spec.pi_outside()) : kNegInf,
                               std::log(piA)};
    std::vector<double> lb = {log_add(lM[0][0], lM[0][1]), log_add(lM[1][0], lM[1][1])};

    auto edge_term = [&](int s, const std::vector<double>& child) {
        return log_add(lM[s][0] + child[0], lM[s][1] + child[1]);
    };
    return tree_dp(gamma, lpi, edge_term, lb);
}

double coarse_moment(const ChainSpec& spec, const SubTree& gamma, double t) {
    return std::exp(coarse_moment_log(spec, gamma, t));
}

OptimalT optimal_t(int gamma_size, const ConstantsBundle& bundle) {
    const double g = gamma_size;
    const double num = bundle.delta0 * g;
    const double den = (1.0 + bundle.d * g) * bundle.f_beta - bundle.delta0 * g * bundle.f_beta;
    OptimalT out;
    out.raw = std::log(num / den);
    out.clamped = std::max(out.raw, 0.0);
    return out;
}

double propagation_bound_log(int gamma_size, const ConstantsBundle& bundle, double t) {
    return std::log(2.0 * bundle.C1) +
           (1.0 + bundle.d * static_cast<double>(gamma_size)) *
               std::log1p(bundle.f_beta * std::exp(t));
}

BadEventBound bad_event_bound(int gamma_size, const ConstantsBundle& bundle) {
    const double g = gamma_size;
    BadEventBound b;
    b.log_final = std::log(bundle.C4) - bundle.lambda_beta * g;
    b.log_closing = std::log(2.0 * bundle.C1) +
                    (1.0 + bundle.d * g) * std::log((1.0 + bundle.d) / bundle.delta0) +
                    bundle.delta0 * g * std::log(bundle.f_beta);
    b.final_bound = std::exp(b.log_final);
    b.closing_bound = std::exp(b.log_closing);
    b.lambda_positive = bundle.lambda_positive;
    return b;
}

double exact_bad_probability(const ChainSpec& spec, const SubTree& gamma, double delta0) {
    const int m = gamma.size();
    const int gbar = m + gamma.boundary_size();
    if (gbar > 12)
        throw SizeLimitError("exact_bad_probability enumerates (Z_q)^{gamma-bar}; "
                             "|gamma-bar| = " + std::to_string(gbar) + " exceeds 12");
    const int q = spec.q();

    // directed edges of E(gamma): internal (parent,v), then one per free slot
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < m; ++v) edges.emplace_back(gamma.parents()[v], v);
    int next = m;
    for (int v = 0; v < m; ++v)
        for (int s = 0; s < gamma.free_slots(v); ++s) edges.emplace_back(v, next++);

    std::vector<bool> inA(q);
    for (int i = 0; i < q; ++i) inA[i] = spec.in_A(i);
    const double threshold = delta0 * m;

    std::vector<int> sig(gbar, 0);
    double prob = 0.0;
    while (true) {
        double w = spec.pi[sig[0]];
        int cnt = 0;
        for (const auto& [a, b] : edges) {
            w *= spec.P[sig[a]][sig[b]];
            if (sig[a] != sig[b] || !inA[sig[a]] || !inA[sig[b]]) ++cnt;
        }
        if (cnt >= threshold) prob += w;
        int pos = gbar - 1;
        while (pos >= 0 && ++sig[pos] == q) sig[pos--] = 0;
        if (pos < 0) break;
    }
    return prob;
}

std::vector<MEntryBound> m_entry_bounds_report(const ChainSpec& spec,
                                               const ConstantsBundle& bundle, double t) {
    const CoarseMatrix M = coarse_matrix(spec, t);
    const double bu = bundle.beta * bundle.u;
    const double d = bundle.d;
    std::vector<MEntryBound> out = {
        {"M(1,1)", M.m[1][1], bundle.C3 * std::exp(-bu + t) + 1.0, false},
        {"M(1,0)", M.m[1][0], bundle.C3 * std::exp(-(d + 1.0) * bu + t), false},
        {"M(0,1)", M.m[0][1], std::exp(t), false},
        {"M(0,0)", M.m[0][0],
         bundle.C3 * std::exp(-bundle.beta * ((d + 1.0) * bundle.u - bundle.U) + t) +
             bundle.C1 * std::exp(-(d - 1.0) * bu + t),
         false},
    };
    for (auto& b : out) b.pass = b.value <= b.bound;
    return out;
}

}  // namespace clocktree
