#include "clocktree/tree_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>

#include "clocktree/coarse_bound.hpp"
#include "clocktree/errors.hpp"
#include "clocktree/numeric.hpp"
#include "clocktree/parallel.hpp"
#include "clocktree/rng.hpp"

namespace clocktree {

TruncatedTree::TruncatedTree(int d, int depth) : d_(d), depth_(depth) {
    if (depth < 1) throw ModelError("truncated tree depth must be >= 1");
    level_offset_.resize(depth + 2);
    level_offset_[0] = 0;
    int64_t size = 1;
    for (int k = 0; k <= depth; ++k) {
        level_offset_[k + 1] = level_offset_[k] + static_cast<int>(size);
        size = (k == 0) ? (d + 1) : size * d;
        if (level_offset_[k + 1] > (1 << 28))
            throw SizeLimitError("truncated tree too large");
    }
}

int TruncatedTree::parent(int v) const {
    if (v == 0) return -1;
    int k = 1;
    while (v >= level_end(k)) ++k;
    const int idx = v - level_begin(k);
    return k == 1 ? 0 : level_begin(k - 1) + idx / d_;
}

SpinConfiguration sample_broadcast(const ChainSpec& spec, const TruncatedTree& tree,
                                   uint64_t seed, int forced_root) {
    Rng rng(seed);
    SpinConfiguration cfg;
    cfg.seed = seed;
    cfg.spins.resize(tree.vertex_count());
    cfg.spins[0] = forced_root >= 0 ? static_cast<uint8_t>(forced_root)
                                    : static_cast<uint8_t>(rng.categorical(spec.pi));
    for (int k = 1; k <= tree.depth(); ++k) {
        const int deg = (k == 1) ? tree.branching() + 1 : tree.branching();
        for (int v = tree.level_begin(k); v < tree.level_end(k); ++v) {
            const int p = (k == 1) ? 0
                                   : tree.level_begin(k - 1) + (v - tree.level_begin(k)) / deg;
            cfg.spins[v] = static_cast<uint8_t>(rng.categorical(spec.P[cfg.spins[p]]));
        }
    }
    return cfg;
}

std::vector<std::pair<int, int>> irregular_edges(const TruncatedTree& tree,
                                                 const std::vector<uint8_t>& spins,
                                                 const std::vector<int>& A) {
    std::vector<bool> inA(256, false);
    for (int a : A) inA[a] = true;
    std::vector<std::pair<int, int>> out;
    for (int k = 1; k <= tree.depth(); ++k) {
        const int deg = (k == 1) ? tree.branching() + 1 : tree.branching();
        for (int v = tree.level_begin(k); v < tree.level_end(k); ++v) {
            const int p = (k == 1) ? 0
                                   : tree.level_begin(k - 1) + (v - tree.level_begin(k)) / deg;
            if (spins[p] != spins[v] || !inA[spins[p]] || !inA[spins[v]])
                out.emplace_back(p, v);
        }
    }
    return out;
}

namespace {

// Leaf-to-root messages on the truncated tree. log_edge(s, j) weighs the
// directed edge s -> j; log_prior weighs the root (empty for the Gibbs
// kernel). Boundary messages are point masses at the given spins.
std::vector<double> posterior_messages(int q, int d, int depth,
                                       const std::vector<uint8_t>& boundary,
                                       const std::function<double(int, int)>& log_edge,
                                       const std::vector<double>& log_prior) {
    int cnt = (depth == 1) ? d + 1 : (d + 1) * static_cast<int>(std::pow(d, depth - 1) + 0.5);
    if (static_cast<int>(boundary.size()) != cnt)
        throw ModelError("boundary size does not match the depth-" + std::to_string(depth) +
                         " layer");

    // messages of the current level, flattened
    std::vector<std::vector<double>> msgs(boundary.size());
    for (size_t i = 0; i < boundary.size(); ++i) {
        msgs[i].assign(q, kNegInf);
        msgs[i][boundary[i]] = 0.0;
    }
    std::vector<double> terms(q);
    for (int level = depth - 1; level >= 1; --level) {
        cnt = (d + 1) * static_cast<int>(std::pow(d, level - 1) + 0.5);
        std::vector<std::vector<double>> next(cnt);
        for (int i = 0; i < cnt; ++i) {
            std::vector<double> lm(q, 0.0);
            for (int c = 0; c < d; ++c) {
                const auto& child = msgs[i * d + c];
                for (int s = 0; s < q; ++s) {
                    for (int j = 0; j < q; ++j) terms[j] = log_edge(s, j) + child[j];
                    lm[s] += log_sum_exp(terms);
                }
            }
            const double mmax = *std::max_element(lm.begin(), lm.end());
            for (double& x : lm) x -= mmax;
            next[i] = std::move(lm);
        }
        msgs = std::move(next);
    }

    std::vector<double> lroot(q, 0.0);
    if (!log_prior.empty()) lroot = log_prior;
    for (const auto& child : msgs) {
        for (int s = 0; s < q; ++s) {
            for (int j = 0; j < q; ++j) terms[j] = log_edge(s, j) + child[j];
            lroot[s] += log_sum_exp(terms);
        }
    }
    const double norm = log_sum_exp(lroot);
    std::vector<double> post(q);
    for (int s = 0; s < q; ++s) post[s] = std::exp(lroot[s] - norm);
    return post;
}

}  // namespace

std::vector<double> root_posterior(const ClockModel& model,
                                   const std::vector<uint8_t>& boundary, int depth) {
    return posterior_messages(
        model.q, model.d, depth, boundary,
        [&model](int s, int j) { return model.log_transfer(s - j); }, {});
}

std::vector<double> chain_root_posterior(const ChainSpec& spec,
                                         const std::vector<uint8_t>& boundary, int depth) {
    const int q = spec.q();
    const int d = [&] {
        // infer d from the boundary layer arithmetic: level sizes are
        // (d+1) d^{depth-1}
        for (int d_try = 2; d_try <= 64; ++d_try) {
            int64_t c = d_try + 1;
            for (int k = 2; k <= depth; ++k) c *= d_try;
            if (c == static_cast<int64_t>(boundary.size())) return d_try;
        }
        throw ModelError("boundary size matches no branching number");
    }();
    return posterior_messages(
        q, d, depth, boundary,
        [&spec](int s, int j) { return spec.log_P[s][j]; }, spec.log_pi);
}

// ---------------------------------------------------------------------------

BadProbReport estimate_bad_probability(const ChainSpec& spec, const SubTree& gamma,
                                       double delta0, const ConstantsBundle& bundle,
                                       int64_t samples, uint64_t seed, int threads) {
    if (samples < 1000) throw ModelError("estimate_bad_probability needs samples >= 1000");
    const int m = gamma.size();
    const int q = spec.q();
    std::vector<bool> inA(q, false);
    for (int a : spec.A) inA[a] = true;
    const double threshold = delta0 * m;

    BadProbReport rep;
    rep.gamma_size = m;
    rep.delta0 = delta0;
    rep.samples = samples;
    rep.seed = seed;
    rep.per_sample.resize(samples);

    parallel_for(samples, threads, [&](int64_t i) {
        Rng rng(derive_seed(seed, static_cast<uint64_t>(i)));
        std::vector<int> sig(m);
        sig[0] = rng.categorical(spec.pi);
        int cnt = 0;
        for (int v = 1; v < m; ++v) {
            const int p = gamma.parents()[v];
            sig[v] = rng.categorical(spec.P[sig[p]]);
            if (sig[p] != sig[v] || !inA[sig[p]] || !inA[sig[v]]) ++cnt;
        }
        for (int v = 0; v < m; ++v) {
            for (int s = 0; s < gamma.free_slots(v); ++s) {
                const int b = rng.categorical(spec.P[sig[v]]);
                if (sig[v] != b || !inA[sig[v]] || !inA[b]) ++cnt;
            }
        }
        rep.per_sample[i] = static_cast<double>(cnt);
    });

    for (double c : rep.per_sample)
        if (c >= threshold) ++rep.hits;
    rep.estimate = wilson_interval(rep.hits, samples);
    const BadEventBound bb = bad_event_bound(m, bundle);
    rep.lemma31_bound = bb.final_bound;
    rep.lambda_positive = bb.lambda_positive;
    rep.pass = !rep.lambda_positive || (rep.estimate.estimate - rep.estimate.halfwidth() <=
                                        rep.lemma31_bound);
    return rep;
}

ReconstructionReport reconstruction_experiment(const ChainSpec& spec, const ClockModel& model,
                                               const ConstantsBundle& bundle, int a, int depth,
                                               int64_t samples, uint64_t seed, int threads) {
    const TruncatedTree tree(model.d, depth);
    ReconstructionReport rep;
    rep.a = a;
    rep.a_in_A = spec.in_A(a);
    rep.depth = depth;
    rep.samples = samples;
    rep.seed = seed;
    rep.eps1 = bundle.eps1;
    rep.bound = 2.0 * static_cast<double>(spec.A.size()) * bundle.eps2;
    rep.bound_vacuous = rep.bound >= 1.0;
    rep.per_sample.resize(samples);

    const int64_t probes = std::min<int64_t>(samples, 200);
    std::vector<double> tv(probes, 0.0);
    parallel_for(samples, threads, [&](int64_t i) {
        const auto cfg = sample_broadcast(spec, tree, derive_seed(seed, i), a);
        std::vector<uint8_t> boundary(cfg.spins.begin() + tree.level_begin(depth),
                                      cfg.spins.begin() + tree.level_end(depth));
        const auto post = root_posterior(model, boundary, depth);
        rep.per_sample[i] = post[a];
        if (i < probes && depth >= 2) {
            std::vector<uint8_t> shallower(cfg.spins.begin() + tree.level_begin(depth - 1),
                                           cfg.spins.begin() + tree.level_end(depth - 1));
            const auto prev = root_posterior(model, shallower, depth - 1);
            double dist = 0.0;
            for (int s = 0; s < model.q; ++s) dist += std::abs(post[s] - prev[s]);
            tv[i] = 0.5 * dist;
        }
    });
    if (depth >= 2) {
        for (double x : tv) rep.tv_depth_change += x;
        rep.tv_depth_change /= static_cast<double>(probes);
    }

    for (double p : rep.per_sample)
        if (p < 1.0 - rep.eps1) ++rep.failures;
    rep.failure_freq = wilson_interval(rep.failures, samples);
    rep.pass = rep.failure_freq.estimate - rep.failure_freq.halfwidth() <= rep.bound;
    return rep;
}

ControlDecayReport reconstruction_control(const ChainSpec& spec, const ClockModel& model,
                                          int a, int min_depth, int max_depth,
                                          int64_t samples, uint64_t seed, int threads) {
    if (min_depth < 1 || max_depth < min_depth)
        throw ModelError("control needs 1 <= min_depth <= max_depth");
    const TruncatedTree tree(model.d, max_depth);
    const int ndepths = max_depth - min_depth + 1;

    ControlDecayReport rep;
    rep.a = a;
    rep.min_depth = min_depth;
    rep.max_depth = max_depth;
    rep.samples = samples;
    rep.seed = seed;

    // one broadcast per sample, evaluated at every depth (common random
    // numbers keeps the depth differences far above the noise)
    rep.per_sample.resize(static_cast<size_t>(samples) * ndepths);
    auto& acc = rep.per_sample;
    parallel_for(samples, threads, [&](int64_t i) {
        const auto cfg = sample_broadcast(spec, tree, derive_seed(seed, i), a);
        for (int depth = min_depth; depth <= max_depth; ++depth) {
            std::vector<uint8_t> boundary(cfg.spins.begin() + tree.level_begin(depth),
                                          cfg.spins.begin() + tree.level_end(depth));
            acc[i * ndepths + (depth - min_depth)] =
                root_posterior(model, boundary, depth)[a];
        }
    });

    rep.mean_posterior.assign(ndepths, 0.0);
    for (int64_t i = 0; i < samples; ++i)
        for (int k = 0; k < ndepths; ++k) rep.mean_posterior[k] += acc[i * ndepths + k];
    for (double& x : rep.mean_posterior) x /= static_cast<double>(samples);
    rep.strictly_decreasing = true;
    for (int k = 0; k + 1 < ndepths; ++k)
        rep.strictly_decreasing =
            rep.strictly_decreasing && rep.mean_posterior[k] > rep.mean_posterior[k + 1];
    return rep;
}

EaReport ea_parameter(const ChainSpec& spec, const ConstantsBundle& bundle, int depth,
                      int64_t samples, uint64_t seed, int threads) {
    const int q = spec.q();
    const TruncatedTree tree(bundle.d, depth);

    EaReport rep;
    rep.depth = depth;
    rep.samples = samples;
    rep.seed = seed;
    rep.per_sample_posterior.resize(samples);

    parallel_for(samples, threads, [&](int64_t i) {
        const auto cfg = sample_broadcast(spec, tree, derive_seed(seed, i));
        std::vector<uint8_t> boundary(cfg.spins.begin() + tree.level_begin(depth),
                                      cfg.spins.begin() + tree.level_end(depth));
        rep.per_sample_posterior[i] = chain_root_posterior(spec, boundary, depth);
    });

    const double S = static_cast<double>(samples);
    std::vector<double> s1(q, 0.0), s2(q, 0.0);
    for (const auto& p : rep.per_sample_posterior)
        for (int a = 0; a < q; ++a) {
            s1[a] += p[a];
            s2[a] += p[a] * p[a];
        }
    auto ea_of = [&](double n, const std::vector<double>& m1, const std::vector<double>& m2) {
        double acc = 0.0;
        for (int a = 0; a < q; ++a) {
            const double mean = m1[a] / n;
            acc += m2[a] / n - mean * mean;
        }
        return acc / q;
    };
    rep.estimate = ea_of(S, s1, s2);

    // delete-one jackknife
    std::vector<double> thetas(samples);
    std::vector<double> m1(q), m2(q);
    for (int64_t i = 0; i < samples; ++i) {
        for (int a = 0; a < q; ++a) {
            const double pa = rep.per_sample_posterior[i][a];
            m1[a] = s1[a] - pa;
            m2[a] = s2[a] - pa * pa;
        }
        thetas[i] = ea_of(S - 1.0, m1, m2);
    }
    double tbar = std::accumulate(thetas.begin(), thetas.end(), 0.0) / S;
    double v = 0.0;
    for (double th : thetas) v += (th - tbar) * (th - tbar);
    rep.jackknife_se = std::sqrt((S - 1.0) / S * v);
    const double z = 1.959963984540054;
    rep.ci = {rep.estimate, rep.estimate - z * rep.jackknife_se,
              rep.estimate + z * rep.jackknife_se};
    rep.positive = rep.ci.lo > 0.0;

    const double nA = static_cast<double>(spec.A.size());
    rep.lower_bound = 1.0 / (2.0 * q) *
                      ((1.0 - bundle.eps1) * (1.0 - bundle.eps1) *
                           (1.0 - 2.0 * nA * bundle.eps2) -
                       (nA - 1.0) / nA);
    return rep;
}

// ---------------------------------------------------------------------------
// Thinned-branch overlap on the tube region around the branch.

int ThinnedBranch::span() const {
    return std::accumulate(spacings.begin(), spacings.end(), 0);
}

ThinnedBranch make_thinned_branch(int n, int kappa) {
    if (n < 1 || kappa < 1) throw ModelError("thinned branch needs n >= 1, kappa >= 1");
    ThinnedBranch b;
    b.n = n;
    for (int i = 1; i < n * n; ++i) b.spacings.push_back((i + kappa - 1) / kappa);
    return b;
}

namespace {

// Complete d-ary subtree hanging off a path vertex: internal levels
// 0..m-1, boundary level m. Vertices are stored level by level.
struct OffTreeShape {
    int d = 0, m = 0;
    std::vector<int> level_begin;  // size m+2
    int internal_count = 0;
    int total_count = 0;
    OffTreeShape(int d_, int m_) : d(d_), m(m_) {
        level_begin.resize(m + 2);
        level_begin[0] = 0;
        int sz = 1;
        for (int l = 0; l <= m; ++l) {
            level_begin[l + 1] = level_begin[l] + sz;
            sz *= d;
        }
        internal_count = level_begin[m];
        total_count = level_begin[m + 1];
    }
};

struct OverlapScratch {
    std::vector<std::vector<uint8_t>> off_spins;   // per off subtree
    std::vector<uint8_t> path_spins;
    std::vector<std::vector<double>> off_evidence; // log W per path vertex, size q
    std::vector<std::vector<double>> below;        // R_j, size q
};

}  // namespace

OverlapReport overlap_experiment(const ChainSpec& spec, const ClockModel& model,
                                 const ConstantsBundle& bundle, const ThinnedBranch& branch,
                                 int tube_depth, int64_t samples, uint64_t seed,
                                 int threads) {
    const int q = model.q;
    const int d = model.d;
    const int L = branch.span();
    const int m = tube_depth;
    if (m < 1) throw ModelError("overlap tube depth must be >= 1");
    const int nsites = branch.n * branch.n;
    const OffTreeShape shape(d, m);

    // branch vertex positions on the path
    std::vector<int> site_pos = {0};
    for (int r : branch.spacings) site_pos.push_back(site_pos.back() + r);

    // off-subtree counts per path vertex
    std::vector<int> off_count(L + 1);
    for (int j = 0; j <= L; ++j)
        off_count[j] = d + 1 - (j > 0 ? 1 : 0) - (j < L ? 1 : 0);

    // transition powers for the independent-pair spine chain
    const int rmax = branch.spacings.empty()
                         ? 1
                         : *std::max_element(branch.spacings.begin(), branch.spacings.end());
    std::vector<std::vector<std::vector<double>>> Ppow(rmax + 1);
    Ppow[1] = spec.P;
    for (int r = 2; r <= rmax; ++r) {
        Ppow[r].assign(q, std::vector<double>(q, 0.0));
        for (int i = 0; i < q; ++i)
            for (int k = 0; k < q; ++k)
                for (int j = 0; j < q; ++j) Ppow[r][i][j] += Ppow[r - 1][i][k] * spec.P[k][j];
    }

    OverlapReport rep;
    rep.n = branch.n;
    rep.spacings = branch.spacings;
    rep.tube_depth = m;
    rep.samples = samples;
    rep.seed = seed;
    rep.per_sample_same.resize(samples);
    rep.per_sample_pair.resize(samples);

    parallel_for(samples, threads, [&](int64_t idx) {
        Rng rng(derive_seed(seed, static_cast<uint64_t>(idx)));
        OverlapScratch sc;
        sc.path_spins.resize(L + 1);
        sc.off_evidence.assign(L + 1, std::vector<double>(q, 0.0));
        sc.below.assign(L + 2, std::vector<double>(q, 0.0));

        // broadcast omega down the path and into every off subtree
        sc.path_spins[0] = static_cast<uint8_t>(rng.categorical(spec.pi));
        for (int j = 1; j <= L; ++j)
            sc.path_spins[j] = static_cast<uint8_t>(rng.categorical(spec.P[sc.path_spins[j - 1]]));
        std::vector<double> terms(q), msg_buf;
        for (int j = 0; j <= L; ++j) {
            for (int c = 0; c < off_count[j]; ++c) {
                std::vector<uint8_t> spins(shape.total_count);
                spins[0] = static_cast<uint8_t>(rng.categorical(spec.P[sc.path_spins[j]]));
                for (int l = 1; l <= m; ++l)
                    for (int v = shape.level_begin[l]; v < shape.level_begin[l + 1]; ++v) {
                        const int p = shape.level_begin[l - 1] +
                                      (v - shape.level_begin[l]) / d;
                        spins[v] = static_cast<uint8_t>(rng.categorical(spec.P[spins[p]]));
                    }
                // upward Gibbs messages, boundary = point masses at level m
                std::vector<std::vector<double>> msg(shape.internal_count,
                                                     std::vector<double>(q, 0.0));
                for (int l = m - 1; l >= 0; --l) {
                    for (int v = shape.level_begin[l]; v < shape.level_begin[l + 1]; ++v) {
                        auto& lm = msg[v];
                        for (int c2 = 0; c2 < d; ++c2) {
                            const int ch = shape.level_begin[l + 1] +
                                           (v - shape.level_begin[l]) * d + c2;
                            if (l == m - 1) {
                                for (int s = 0; s < q; ++s)
                                    lm[s] += model.log_transfer(s - spins[ch]);
                            } else {
                                for (int s = 0; s < q; ++s) {
                                    for (int j2 = 0; j2 < q; ++j2)
                                        terms[j2] = model.log_transfer(s - j2) + msg[ch][j2];
                                    lm[s] += log_sum_exp(terms);
                                }
                            }
                        }
                        const double mmax = *std::max_element(lm.begin(), lm.end());
                        for (double& x : lm) x -= mmax;
                    }
                }
                for (int s = 0; s < q; ++s) {
                    for (int j2 = 0; j2 < q; ++j2)
                        terms[j2] = model.log_transfer(s - j2) + msg[0][j2];
                    sc.off_evidence[j][s] += log_sum_exp(terms);
                }
            }
        }

        // below-messages along the path, then forward-sample sigma on it
        for (int s = 0; s < q; ++s) sc.below[L + 1][s] = 0.0;
        for (int j = L; j >= 1; --j) {
            for (int s = 0; s < q; ++s) {
                for (int j2 = 0; j2 < q; ++j2)
                    terms[j2] = model.log_transfer(s - j2) + sc.off_evidence[j][j2] +
                                sc.below[j + 1][j2];
                sc.below[j][s] = log_sum_exp(terms);
            }
            const double mmax = *std::max_element(sc.below[j].begin(), sc.below[j].end());
            for (double& x : sc.below[j]) x -= mmax;
        }

        std::vector<uint8_t> sigma(L + 1);
        std::vector<double> logits(q), probs(q);
        for (int s = 0; s < q; ++s) logits[s] = sc.off_evidence[0][s] + sc.below[1][s];
        auto sample_logits = [&]() {
            const double norm = log_sum_exp(logits);
            for (int s = 0; s < q; ++s) probs[s] = std::exp(logits[s] - norm);
            return static_cast<uint8_t>(rng.categorical(probs));
        };
        sigma[0] = sample_logits();
        for (int j = 1; j <= L; ++j) {
            for (int s = 0; s < q; ++s)
                logits[s] = model.log_transfer(sigma[j - 1] - s) + sc.off_evidence[j][s] +
                            sc.below[j + 1][s];
            sigma[j] = sample_logits();
        }

        int match = 0;
        for (int pos : site_pos)
            if (sigma[pos] == sc.path_spins[pos]) ++match;
        rep.per_sample_same[idx] = static_cast<double>(match) / nsites;

        // independent pair on the spine via transition powers
        int match2 = 0;
        int w1 = rng.categorical(spec.pi), w2 = rng.categorical(spec.pi);
        if (w1 == w2) ++match2;
        for (int r : branch.spacings) {
            w1 = rng.categorical(Ppow[r][w1]);
            w2 = rng.categorical(Ppow[r][w2]);
            if (w1 == w2) ++match2;
        }
        rep.per_sample_pair[idx] = static_cast<double>(match2) / nsites;
    });

    rep.same_mean = mean_interval(rep.per_sample_same);
    rep.same_bound = 1.0 - bundle.eps1 - bundle.eps2;
    rep.same_pass = rep.same_mean.estimate >= rep.same_bound - rep.same_mean.halfwidth();

    rep.pair_mean = mean_interval(rep.per_sample_pair);
    rep.pair_target = 0.0;
    for (int a = 0; a < q; ++a) rep.pair_target += spec.pi[a] * spec.pi[a];
    rep.pair_pass =
        rep.pair_target >= rep.pair_mean.lo && rep.pair_target <= rep.pair_mean.hi;
    return rep;
}

// ---------------------------------------------------------------------------
// Covariance decay of radius-truncated bad events.

namespace {

// Dumbbell region: path u = w_0 .. w_D = v plus every vertex within graph
// distance radius+1 of u or v. Rooted at u; parent ids precede children.
struct Region {
    int d = 0;
    std::vector<int> parent;
    std::vector<std::vector<int>> children;
    std::vector<int> dist_u, dist_v;
    int v_id = 0;
};

Region build_dumbbell(int d, int D, int radius) {
    Region reg;
    reg.d = d;
    const int reach = radius + 1;
    // path
    for (int j = 0; j <= D; ++j) {
        reg.parent.push_back(j == 0 ? -1 : j - 1);
        reg.dist_u.push_back(j);
        reg.dist_v.push_back(D - j);
    }
    reg.v_id = D;
    // grow off-path children wherever a ball still reaches
    for (size_t w = 0; w < reg.parent.size(); ++w) {
        int have = (reg.parent[w] >= 0 ? 1 : 0);
        for (size_t x = 0; x < reg.parent.size(); ++x)
            if (reg.parent[x] == static_cast<int>(w)) ++have;
        const int du = reg.dist_u[w], dv = reg.dist_v[w];
        if (std::min(du, dv) + 1 > reach) continue;
        for (int c = have; c < d + 1; ++c) {
            reg.parent.push_back(static_cast<int>(w));
            reg.dist_u.push_back(du + 1);
            reg.dist_v.push_back(dv + 1);
        }
    }
    reg.children.resize(reg.parent.size());
    for (size_t x = 1; x < reg.parent.size(); ++x)
        reg.children[reg.parent[x]].push_back(static_cast<int>(x));
    return reg;
}

// Connected subsets of {w : dist[w] <= radius} containing `center`; each is
// returned as the list of region edges attached to it (edges keyed by their
// child endpoint).
std::vector<std::vector<int>> enumerate_contour_edge_sets(const Region& reg, int center,
                                                          const std::vector<int>& dist,
                                                          int radius,
                                                          std::vector<int>& sizes) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur = {center};
    std::vector<char> in_cur(reg.parent.size(), 0), banned(reg.parent.size(), 0);
    in_cur[center] = 1;

    auto neighbors = [&](int w) {
        std::vector<int> nb = reg.children[w];
        if (reg.parent[w] >= 0) nb.push_back(reg.parent[w]);
        return nb;
    };
    auto record = [&]() {
        std::vector<int> edges;
        for (size_t x = 1; x < reg.parent.size(); ++x)
            if (in_cur[x] || in_cur[reg.parent[x]]) edges.push_back(static_cast<int>(x));
        out.push_back(std::move(edges));
        sizes.push_back(static_cast<int>(cur.size()));
    };

    // depth-first enumeration with a banned list so each subset appears once
    std::function<void(std::vector<int>)> rec = [&](std::vector<int> frontier) {
        record();
        for (size_t i = 0; i < frontier.size(); ++i) {
            const int c = frontier[i];
            if (banned[c] || in_cur[c]) continue;
            std::vector<int> next(frontier.begin() + i + 1, frontier.end());
            for (int nb : neighbors(c))
                if (!in_cur[nb] && !banned[nb] && dist[nb] <= radius) next.push_back(nb);
            in_cur[c] = 1;
            cur.push_back(c);
            // ban the siblings we skipped so far for the recursive call
            std::vector<int> newly_banned;
            for (size_t k = 0; k < i; ++k)
                if (!banned[frontier[k]]) {
                    banned[frontier[k]] = 1;
                    newly_banned.push_back(frontier[k]);
                }
            rec(std::move(next));
            for (int b : newly_banned) banned[b] = 0;
            in_cur[c] = 0;
            cur.pop_back();
        }
    };

    std::vector<int> frontier;
    for (int nb : neighbors(center))
        if (dist[nb] <= radius) frontier.push_back(nb);
    rec(std::move(frontier));
    return out;
}

}  // namespace

CovarianceReport covariance_decay(const ChainSpec& spec, int d,
                                  const std::vector<int>& distances, int radius,
                                  double delta0, int64_t samples, uint64_t seed,
                                  int threads) {
    const int q = spec.q();
    std::vector<bool> inA(q, false);
    for (int a : spec.A) inA[a] = true;

    CovarianceReport rep;
    rep.distances = distances;
    rep.radius = radius;
    rep.delta0 = delta0;
    rep.samples = samples;
    rep.seed = seed;

    for (size_t di = 0; di < distances.size(); ++di) {
        const int D = distances[di];
        if (D < 1) throw ModelError("covariance distances must be >= 1");
        const Region reg = build_dumbbell(d, D, radius);
        const int nv = static_cast<int>(reg.parent.size());

        std::vector<int> sizes_u, sizes_v;
        const auto contours_u =
            enumerate_contour_edge_sets(reg, 0, reg.dist_u, radius, sizes_u);
        const auto contours_v =
            enumerate_contour_edge_sets(reg, reg.v_id, reg.dist_v, radius, sizes_v);
        rep.contours_per_site = static_cast<int>(contours_u.size());

        std::vector<uint8_t> xu(samples), xv(samples);
        parallel_for(samples, threads, [&](int64_t i) {
            Rng rng(derive_seed(seed ^ (0x517CC1B727220A95ULL * (di + 1)),
                                static_cast<uint64_t>(i)));
            std::vector<int> sig(nv);
            sig[0] = rng.categorical(spec.pi);
            for (int w = 1; w < nv; ++w)
                sig[w] = rng.categorical(spec.P[sig[reg.parent[w]]]);
            // irregular flag per region edge, keyed by child endpoint
            std::vector<char> irr(nv, 0);
            for (int w = 1; w < nv; ++w) {
                const int p = reg.parent[w];
                irr[w] = (sig[p] != sig[w] || !inA[sig[p]] || !inA[sig[w]]) ? 1 : 0;
            }
            auto any_bad = [&](const std::vector<std::vector<int>>& contours,
                              const std::vector<int>& sizes) {
                for (size_t c = 0; c < contours.size(); ++c) {
                    int cnt = 0;
                    for (int e : contours[c]) cnt += irr[e];
                    if (cnt >= delta0 * sizes[c]) return uint8_t{1};
                }
                return uint8_t{0};
            };
            xu[i] = any_bad(contours_u, sizes_u);
            xv[i] = any_bad(contours_v, sizes_v);
        });

        CovariancePoint pt;
        pt.distance = D;
        double su = 0.0, sv = 0.0, suv = 0.0;
        for (int64_t i = 0; i < samples; ++i) {
            su += xu[i];
            sv += xv[i];
            suv += static_cast<double>(xu[i]) * xv[i];
        }
        const double S = static_cast<double>(samples);
        pt.mean_u = su / S;
        pt.mean_v = sv / S;
        pt.cov = suv / S - pt.mean_u * pt.mean_v;
        pt.xu = std::move(xu);
        pt.xv = std::move(xv);
        rep.points.push_back(std::move(pt));
        if (di == 0) rep.variance = rep.points.back().mean_u * (1.0 - rep.points.back().mean_u);
    }

    // least-squares slope of log|cov| against distance
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int npts = 0;
    for (const auto& pt : rep.points) {
        if (pt.cov == 0.0) continue;
        const double y = std::log(std::abs(pt.cov));
        sx += pt.distance;
        sy += y;
        sxx += static_cast<double>(pt.distance) * pt.distance;
        sxy += pt.distance * y;
        ++npts;
    }
    if (npts >= 2 && sxx * npts - sx * sx > 0.0) {
        rep.slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
        rep.slope_valid = true;
    }
    return rep;
}

}  // namespace clocktree
