#include <cmath>
#include <set>

#include "clocktree/coarse_bound.hpp"
#include "clocktree/errors.hpp"
#include "clocktree/tree_sim.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace clocktree;

namespace {

ClockModel potts3(double beta) { return build_model(3, 2, beta, {0.0, 1.0}); }

}  // namespace

TEST_CASE("truncated tree shape") {
    const TruncatedTree t(2, 3);
    // 1 + (d+1)(d^n - 1)/(d-1) = 1 + 3 * 7 = 22
    CHECK(t.vertex_count() == 22);
    CHECK(t.level_size(0) == 1);
    CHECK(t.level_size(1) == 3);
    CHECK(t.level_size(2) == 6);
    CHECK(t.level_size(3) == 12);
    CHECK(t.parent(0) == -1);
    CHECK(t.parent(1) == 0);
    CHECK(t.parent(3) == 0);
    CHECK(t.parent(4) == 1);
    CHECK(t.parent(5) == 1);
    CHECK(t.parent(6) == 2);
    CHECK(t.parent(10) == 4);

    const TruncatedTree t3(3, 2);
    CHECK(t3.vertex_count() == 1 + 4 * (9 - 1) / 2);
}

TEST_CASE("broadcast determinism and stationarity") {
    const ChainSpec spec = solve_chain(potts3(2.0), {0, 1});
    const TruncatedTree tree(2, 2);

    const auto c1 = sample_broadcast(spec, tree, 424242);
    const auto c2 = sample_broadcast(spec, tree, 424242);
    CHECK(c1.spins == c2.spins);
    const auto c3 = sample_broadcast(spec, tree, 424243);
    CHECK(c1.spins != c3.spins);

    // exact single-vertex marginals of the product measure equal pi
    for (int v : {0, 2, 5, 9}) {
        const auto marg = oracles::brute_vertex_marginal(spec, tree, v);
        for (int i = 0; i < 3; ++i)
            CHECK(marg[i] == doctest::Approx(spec.pi[i]).epsilon(1e-10));
    }

    // Monte Carlo root frequency within 3 sigma
    const int64_t N = 20000;
    int64_t count0 = 0;
    for (int64_t s = 0; s < N; ++s) {
        const auto cfg = sample_broadcast(spec, tree, derive_seed(5, s));
        if (cfg.spins[0] == 0) ++count0;
    }
    const double p = spec.pi[0];
    const double sigma = std::sqrt(p * (1 - p) * N);
    CHECK(std::abs(count0 - p * N) <= 3.0 * sigma);

    // edge pair frequency against pi(i) P(i,j)
    int64_t pair01 = 0;
    for (int64_t s = 0; s < N; ++s) {
        const auto cfg = sample_broadcast(spec, tree, derive_seed(6, s));
        if (cfg.spins[0] == 0 && cfg.spins[1] == 1) ++pair01;
    }
    const double pp = spec.pi[0] * spec.P[0][1];
    CHECK(std::abs(pair01 - pp * N) <= 3.0 * std::sqrt(pp * (1 - pp) * N) + 1.0);
}

TEST_CASE("irregular edges") {
    const TruncatedTree tree(2, 2);
    const std::vector<int> A = {0, 1};
    std::vector<uint8_t> constant_in(tree.vertex_count(), 1);
    CHECK(irregular_edges(tree, constant_in, A).empty());

    std::vector<uint8_t> constant_out(tree.vertex_count(), 2);
    CHECK(irregular_edges(tree, constant_out, A).size() ==
          static_cast<size_t>(tree.vertex_count() - 1));

    // single flipped interior vertex: exactly deg = d+1 edges
    std::vector<uint8_t> flip(tree.vertex_count(), 0);
    flip[1] = 1;  // level-1 vertex: parent 0, children 4,5
    const auto edges = irregular_edges(tree, flip, A);
    CHECK(edges.size() == 3);
    std::set<std::pair<int, int>> got(edges.begin(), edges.end());
    CHECK(got.count({0, 1}) == 1);
    CHECK(got.count({1, 4}) == 1);
    CHECK(got.count({1, 5}) == 1);
}

TEST_CASE("root posterior: depth-1 closed form and normalization") {
    const ClockModel m = potts3(1.7);
    // boundary all equal to a: posterior ~ Q(i-a)^{d+1}
    const int a = 1;
    const std::vector<uint8_t> boundary(3, a);
    const auto post = root_posterior(m, boundary, 1);
    double z = 0.0;
    for (int i = 0; i < 3; ++i) z += std::exp(3.0 * m.log_transfer(i - a));
    for (int i = 0; i < 3; ++i)
        CHECK(post[i] == doctest::Approx(std::exp(3.0 * m.log_transfer(i - a)) / z)
                             .epsilon(1e-12));
    CHECK(post[a] > post[(a + 1) % 3]);
    double s = 0.0;
    for (double p : post) s += p;
    CHECK(std::abs(s - 1.0) <= 1e-12);
}

TEST_CASE("root posterior equals brute-force enumeration (depth <= 2)") {
    for (int q : {3, 4}) {
        const ClockModel m = q == 3 ? potts3(1.3) : build_model(4, 2, 1.3, {0.0, 1.0, 1.2});
        Rng rng(55);
        for (int depth : {1, 2}) {
            const int bsize = depth == 1 ? 3 : 6;
            for (int trial = 0; trial < 4; ++trial) {
                std::vector<uint8_t> boundary(bsize);
                for (auto& b : boundary)
                    b = static_cast<uint8_t>(rng.next_u64() % static_cast<uint64_t>(q));
                const auto fast = root_posterior(m, boundary, depth);
                const auto slow = oracles::brute_root_posterior(m, boundary, depth);
                for (int i = 0; i < q; ++i)
                    CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("posterior equivariance under the clock rotation") {
    const ClockModel m = build_model(5, 2, 2.0, {0.0, 1.0, 1.4});
    Rng rng(71);
    std::vector<uint8_t> boundary(6);
    for (auto& b : boundary) b = static_cast<uint8_t>(rng.next_u64() % 5);
    const auto base = root_posterior(m, boundary, 2);
    for (int r : {1, 2, 3}) {
        std::vector<uint8_t> rotated(6);
        for (size_t i = 0; i < boundary.size(); ++i)
            rotated[i] = static_cast<uint8_t>((boundary[i] + r) % 5);
        const auto rot = root_posterior(m, rotated, 2);
        for (int i = 0; i < 5; ++i)
            CHECK(rot[(i + r) % 5] == doctest::Approx(base[i]).epsilon(1e-12));
    }
}

TEST_CASE("chain posterior agrees with the transfer-operator posterior") {
    const ClockModel m = potts3(2.5);
    const ChainSpec spec = solve_chain(m, {0, 1});
    Rng rng(81);
    for (int depth : {1, 2, 3}) {
        const TruncatedTree tree(2, depth);
        std::vector<uint8_t> boundary(tree.level_size(depth));
        for (auto& b : boundary) b = static_cast<uint8_t>(rng.next_u64() % 3);
        const auto from_Q = root_posterior(m, boundary, depth);
        const auto from_P = chain_root_posterior(spec, boundary, depth);
        for (int i = 0; i < 3; ++i)
            CHECK(from_Q[i] == doctest::Approx(from_P[i]).epsilon(1e-10));
    }
}

TEST_CASE("bad probability estimator") {
    const ClockModel m = potts3(1.5);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const ConstantsBundle b = constants(m, 2);
    Rng rng(3);
    const SubTree g = grow_random_subtree(2, 3, rng);

    // delta0 = 0: threshold always met
    const auto always = estimate_bad_probability(spec, g, 0.0, b, 2000, 99);
    CHECK(always.estimate.estimate == 1.0);

    // estimate brackets the exact value
    const double exact = exact_bad_probability(spec, g, b.delta0);
    const auto est = estimate_bad_probability(spec, g, b.delta0, b, 20000, 7);
    CHECK(est.estimate.lo <= exact);
    CHECK(exact <= est.estimate.hi);

    CHECK_THROWS_AS(estimate_bad_probability(spec, g, 0.25, b, 10, 1), ModelError);
}

TEST_CASE("reconstruction at depth 1 against exact enumeration") {
    const ClockModel m = potts3(2.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const ConstantsBundle b = constants(m, 2);
    const int a = 0;

    // exact failure probability: sum over the 27 boundary words
    double exact_fail = 0.0;
    for (int w0 = 0; w0 < 3; ++w0)
        for (int w1 = 0; w1 < 3; ++w1)
            for (int w2 = 0; w2 < 3; ++w2) {
                const double pw = spec.P[a][w0] * spec.P[a][w1] * spec.P[a][w2];
                const std::vector<uint8_t> boundary = {static_cast<uint8_t>(w0),
                                                       static_cast<uint8_t>(w1),
                                                       static_cast<uint8_t>(w2)};
                if (root_posterior(m, boundary, 1)[a] < 1.0 - b.eps1) exact_fail += pw;
            }

    const auto rep = reconstruction_experiment(spec, m, b, a, 1, 20000, 13);
    CHECK(rep.failure_freq.lo <= exact_fail + 1e-12);
    CHECK(exact_fail <= rep.failure_freq.hi + 1e-12);
}

TEST_CASE("control decay: posterior mass on a state outside A shrinks") {
    const ClockModel m = potts3(1.5);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const auto ctl = reconstruction_control(spec, m, 2, 2, 5, 800, 21, 2);
    REQUIRE(ctl.mean_posterior.size() == 4);
    CHECK(ctl.strictly_decreasing);
}

TEST_CASE("EA parameter: free chain gives zero, estimates are nonnegative") {
    const ClockModel m = potts3(2.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const ConstantsBundle b = constants(m, 2);

    ChainSpec free = spec;
    for (int i = 0; i < 3; ++i) {
        free.P[i] = free.pi;
        for (int j = 0; j < 3; ++j) free.log_P[i][j] = free.log_pi[j];
    }
    const auto zero = ea_parameter(free, b, 3, 400, 17);
    CHECK(std::abs(zero.estimate) <= 1e-12);

    const auto est = ea_parameter(spec, b, 3, 400, 17);
    CHECK(est.estimate >= 0.0);
    CHECK(est.jackknife_se >= 0.0);
}

TEST_CASE("thinned branch construction") {
    const ThinnedBranch br = make_thinned_branch(3, 2);
    REQUIRE(br.spacings.size() == 8);  // n^2 - 1
    // ceil(i/2) for i = 1..8
    const std::vector<int> want = {1, 1, 2, 2, 3, 3, 4, 4};
    CHECK(br.spacings == want);
    CHECK(br.span() == 20);
    for (size_t i = 1; i < br.spacings.size(); ++i)
        CHECK(br.spacings[i] >= br.spacings[i - 1]);
}

TEST_CASE("overlap experiment: single-vertex branch laws") {
    const ClockModel m = potts3(2.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const ConstantsBundle b = constants(m, 2);
    const ThinnedBranch single = make_thinned_branch(1, 1);
    const auto rep = overlap_experiment(spec, m, b, single, 3, 4000, 29);

    double target = 0.0;
    for (double p : spec.pi) target += p * p;
    CHECK(rep.pair_target == doctest::Approx(target).epsilon(1e-14));
    // Bernoulli mean within the reported CI
    CHECK(rep.pair_mean.lo <= target);
    CHECK(target <= rep.pair_mean.hi);
    for (double x : rep.per_sample_same) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
    for (double x : rep.per_sample_pair) CHECK((x == 0.0 || x == 1.0));
}

TEST_CASE("overlap sampler matches exact enumeration on the smallest tube") {
    // n = 1, tube depth 1: the tube region is the depth-2 truncated tree, so
    // E[1(sigma_root = omega_root)] = sum_omega mu(omega) gamma(sigma_root =
    // omega_root | omega at level 2) is computable by full enumeration.
    const ClockModel m = potts3(2.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const ConstantsBundle b = constants(m, 2);
    const TruncatedTree tree(2, 2);
    const int q = 3, n = tree.vertex_count();

    double exact_mean = 0.0;
    std::vector<int> sig(n, 0);
    while (true) {
        double w = spec.pi[sig[0]];
        for (int v = 1; v < n; ++v) w *= spec.P[sig[tree.parent(v)]][sig[v]];
        std::vector<uint8_t> boundary;
        for (int v = tree.level_begin(2); v < tree.level_end(2); ++v)
            boundary.push_back(static_cast<uint8_t>(sig[v]));
        exact_mean += w * root_posterior(m, boundary, 2)[sig[0]];
        int pos = n - 1;
        while (pos >= 0 && ++sig[pos] == q) sig[pos--] = 0;
        if (pos < 0) break;
    }

    const ThinnedBranch single = make_thinned_branch(1, 1);
    const auto rep = overlap_experiment(spec, m, b, single, 1, 40000, 57, 2);
    const double se = std::sqrt(exact_mean * (1 - exact_mean) / 40000.0);
    CHECK(std::abs(rep.same_mean.estimate - exact_mean) <= 3.5 * se);
}

TEST_CASE("overlap spine conditioning matches a half-exact estimator") {
    // branch n=2 with unit spacings, tube depth 1. The oracle samples omega
    // on an independently constructed copy of the region and evaluates
    // E[overlap | omega] exactly by enumerating every interior sigma.
    const ClockModel m = potts3(2.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const ConstantsBundle b = constants(m, 2);
    const int q = 3;

    // region: path 0-1-2-3, subtree roots 4..9, boundary 10..21
    const std::vector<std::pair<int, int>> edges = {
        {0, 1}, {1, 2}, {2, 3},                            // spine
        {0, 4}, {0, 5}, {1, 6}, {2, 7}, {3, 8}, {3, 9},    // subtree roots
        {4, 10}, {4, 11}, {5, 12}, {5, 13}, {6, 14}, {6, 15},
        {7, 16}, {7, 17}, {8, 18}, {8, 19}, {9, 20}, {9, 21}};
    const int interior = 10, total = 22;
    double QM[3][3];
    for (int a = 0; a < q; ++a)
        for (int bb = 0; bb < q; ++bb) QM[a][bb] = std::exp(m.log_transfer(a - bb));

    Rng rng(4242);
    const int omega_samples = 300;
    std::vector<double> vals(omega_samples);
    for (int s = 0; s < omega_samples; ++s) {
        std::vector<int> omega(total);
        omega[0] = rng.categorical(spec.pi);
        for (auto [x, y] : edges) omega[y] = rng.categorical(spec.P[omega[x]]);

        double z = 0.0, match[4] = {0, 0, 0, 0};
        std::vector<int> sig(interior, 0);
        while (true) {
            double w = 1.0;
            for (auto [x, y] : edges) {
                const int sx = sig[x];
                const int sy = y < interior ? sig[y] : omega[y];
                w *= QM[sx][sy];
            }
            z += w;
            for (int j = 0; j < 4; ++j)
                if (sig[j] == omega[j]) match[j] += w;
            int pos = interior - 1;
            while (pos >= 0 && ++sig[pos] == q) sig[pos--] = 0;
            if (pos < 0) break;
        }
        vals[s] = (match[0] + match[1] + match[2] + match[3]) / (4.0 * z);
    }
    const Interval oracle = mean_interval(vals);

    ThinnedBranch branch;
    branch.n = 2;
    branch.spacings = {1, 1, 1};
    const auto rep = overlap_experiment(spec, m, b, branch, 1, 40000, 58, 2);
    const double tol = 2.0 * (oracle.halfwidth() + rep.same_mean.halfwidth());
    CHECK(std::abs(rep.same_mean.estimate - oracle.estimate) <= tol);
}

TEST_CASE("overlap experiment: multi-site branch stays within bounds") {
    const ClockModel m = potts3(2.5);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const ConstantsBundle b = constants(m, 2);
    const ThinnedBranch br = make_thinned_branch(2, 2);  // 4 sites, span 1+1+2 = 4
    const auto rep = overlap_experiment(spec, m, b, br, 3, 1500, 33, 2);
    CHECK(rep.same_mean.estimate <= 1.0);
    CHECK(rep.same_mean.estimate >= 0.0);
    CHECK(rep.pair_mean.lo <= rep.pair_target);
    CHECK(rep.pair_target <= rep.pair_mean.hi);
}

TEST_CASE("covariance decay of truncated bad events") {
    const ClockModel m = potts3(2.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const ConstantsBundle b = constants(m, 2);
    const auto rep =
        covariance_decay(spec, m.d, {2, 4, 6, 8}, 1, b.delta0, 60000, 37, 2);
    REQUIRE(rep.points.size() == 4);
    // connected subsets of the radius-1 ball containing the center: every
    // subset of the d+1 = 3 neighbors
    CHECK(rep.contours_per_site == 8);
    CHECK(rep.variance >= 0.0);
    for (const auto& pt : rep.points) {
        CHECK(std::abs(pt.cov) <= 0.25);
        CHECK(pt.mean_u > 0.0);  // bad events visible at moderate beta
    }
    CHECK(rep.slope_valid);
    CHECK(rep.slope < 0.0);

    // radius 2: each of the 3 branches contributes 5 connected shapes
    const auto rep2 = covariance_decay(spec, m.d, {6}, 2, b.delta0, 2000, 38, 2);
    CHECK(rep2.contours_per_site == 125);
}

TEST_CASE("experiment reports are reproducible bit for bit") {
    const ClockModel m = potts3(2.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const ConstantsBundle b = constants(m, 2);

    const auto r1 = ea_parameter(spec, b, 3, 300, 123, 1);
    const auto r2 = ea_parameter(spec, b, 3, 300, 123, 4);
    CHECK(r1.estimate == r2.estimate);
    CHECK(r1.jackknife_se == r2.jackknife_se);
    CHECK(r1.per_sample_posterior == r2.per_sample_posterior);

    Rng rng(3);
    const SubTree g = grow_random_subtree(2, 4, rng);
    const auto b1 = estimate_bad_probability(spec, g, b.delta0, b, 5000, 9, 1);
    const auto b2 = estimate_bad_probability(spec, g, b.delta0, b, 5000, 9, 3);
    CHECK(b1.per_sample == b2.per_sample);
    CHECK(b1.hits == b2.hits);
}
