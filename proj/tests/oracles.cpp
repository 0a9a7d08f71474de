#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracles {

using clocktree::ChainSpec;
using clocktree::ClockModel;
using clocktree::SubTree;
using clocktree::TruncatedTree;

namespace {

struct GammaBar {
    int total = 0;                              // |gamma| + |boundary|
    std::vector<std::pair<int, int>> edges;     // E(gamma), directed away from x
};

GammaBar layout(const SubTree& g) {
    GammaBar gb;
    const int m = g.size();
    for (int v = 1; v < m; ++v) gb.edges.emplace_back(g.parents()[v], v);
    int next = m;
    for (int v = 0; v < m; ++v)
        for (int s = 0; s < g.free_slots(v); ++s) gb.edges.emplace_back(v, next++);
    gb.total = next;
    return gb;
}

bool odometer(std::vector<int>& sig, int base) {
    int pos = static_cast<int>(sig.size()) - 1;
    while (pos >= 0 && ++sig[pos] == base) sig[pos--] = 0;
    return pos >= 0;
}

}  // namespace

double brute_moment(const ChainSpec& spec, const SubTree& gamma, double t) {
    const int q = spec.q();
    const GammaBar gb = layout(gamma);
    std::vector<bool> inA(q, false);
    for (int a : spec.A) inA[a] = true;

    std::vector<int> sig(gb.total, 0);
    double total = 0.0;
    do {
        double w = spec.pi[sig[0]];
        for (auto [a, b] : gb.edges) {
            const bool irr = sig[a] != sig[b] || !inA[sig[a]] || !inA[sig[b]];
            w *= spec.P[sig[a]][sig[b]] * (irr ? std::exp(t) : 1.0);
        }
        total += w;
    } while (odometer(sig, q));
    return total;
}

double brute_coarse_moment(const ChainSpec& spec, const SubTree& gamma, double t) {
    const int q = spec.q();
    std::vector<bool> inA(q, false);
    for (int a : spec.A) inA[a] = true;

    double M[2][2] = {{0, 0}, {0, 0}};
    const double et = std::exp(t);
    for (int a = 0; a < q; ++a) {
        double toA = 0.0, toAc = 0.0;
        for (int j = 0; j < q; ++j) (inA[j] ? toA : toAc) += spec.P[a][j];
        if (inA[a]) {
            M[1][0] = std::max(M[1][0], toAc * et);
            M[1][1] = std::max(M[1][1], (toA - spec.P[a][a]) * et + spec.P[a][a]);
        } else {
            M[0][0] = std::max(M[0][0], toAc * et);
            M[0][1] = std::max(M[0][1], toA * et);
        }
    }
    double piA = 0.0;
    for (int a : spec.A) piA += spec.pi[a];
    const double piTau[2] = {1.0 - piA, piA};

    const GammaBar gb = layout(gamma);
    std::vector<int> tau(gb.total, 0);
    double total = 0.0;
    do {
        double w = piTau[tau[0]];
        for (auto [a, b] : gb.edges) w *= M[tau[a]][tau[b]];
        total += w;
    } while (odometer(tau, 2));
    return total;
}

std::vector<double> brute_root_posterior(const ClockModel& model,
                                         const std::vector<uint8_t>& boundary, int depth) {
    if (depth > 2) throw std::runtime_error("brute_root_posterior supports depth <= 2");
    const int q = model.q;
    const int d = model.d;
    const TruncatedTree tree(d, depth);
    const int interior = tree.level_begin(depth);
    if (static_cast<int>(boundary.size()) != tree.level_size(depth))
        throw std::runtime_error("boundary size mismatch");

    std::vector<double> weight(q, 0.0);
    std::vector<int> sig(interior, 0);
    do {
        double w = 1.0;
        for (int k = 1; k <= depth; ++k) {
            const int deg = (k == 1) ? d + 1 : d;
            for (int v = tree.level_begin(k); v < tree.level_end(k); ++v) {
                const int p =
                    (k == 1) ? 0 : tree.level_begin(k - 1) + (v - tree.level_begin(k)) / deg;
                const int sv = (v < interior) ? sig[v] : boundary[v - interior];
                w *= std::exp(model.log_transfer(sig[p] - sv));
            }
        }
        weight[sig[0]] += w;
    } while (odometer(sig, q));

    double norm = 0.0;
    for (double w : weight) norm += w;
    for (double& w : weight) w /= norm;
    return weight;
}

std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> S) {
    const int n = static_cast<int>(S.size());
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int r = p + 1; r < n; ++r) off += S[p][r] * S[p][r];
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p)
            for (int r = p + 1; r < n; ++r) {
                if (S[p][r] == 0.0) continue;
                const double theta = (S[r][r] - S[p][p]) / (2.0 * S[p][r]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double skp = S[k][p], skr = S[k][r];
                    S[k][p] = c * skp - s * skr;
                    S[k][r] = s * skp + c * skr;
                }
                for (int k = 0; k < n; ++k) {
                    const double spk = S[p][k], srk = S[r][k];
                    S[p][k] = c * spk - s * srk;
                    S[r][k] = s * spk + c * srk;
                }
            }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = S[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

std::vector<double> brute_vertex_marginal(const ChainSpec& spec, const TruncatedTree& tree,
                                          int vertex) {
    const int q = spec.q();
    const int n = tree.vertex_count();
    if (n > 12) throw std::runtime_error("brute_vertex_marginal supports <= 12 vertices");
    std::vector<double> marg(q, 0.0);
    std::vector<int> sig(n, 0);
    do {
        double w = spec.pi[sig[0]];
        for (int v = 1; v < n; ++v) w *= spec.P[sig[tree.parent(v)]][sig[v]];
        marg[sig[vertex]] += w;
    } while (odometer(sig, q));
    return marg;
}

}  // namespace oracles
