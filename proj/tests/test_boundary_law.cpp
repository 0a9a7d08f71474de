#include <cmath>

#include "clocktree/boundary_law.hpp"
#include "clocktree/errors.hpp"
#include "clocktree/reports.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace clocktree;

namespace {

ClockModel potts3(double beta) { return build_model(3, 2, beta, {0.0, 1.0}); }

}  // namespace

TEST_CASE("solved law reflects the symmetry of A and localizes") {
    const ClockModel m = potts3(3.0);
    const BoundaryLaw law = solve_boundary_law(m, {0, 1});
    CHECK(law.residual <= 1e-13);
    CHECK(law.u[0] == doctest::Approx(law.u[1]).epsilon(1e-12));  // 0 <-> 1 swap symmetry
    CHECK(law.u[2] < law.u[0]);
    CHECK(law.u[0] == 1.0);  // max-normalized
    for (double x : law.u) CHECK(x > 0.0);
}

TEST_CASE("A = Z_q free state for Potts is the constant law") {
    const ClockModel m = potts3(2.0);
    const BoundaryLaw law = solve_boundary_law(m, {0, 1, 2});
    for (double x : law.u) CHECK(x == doctest::Approx(1.0).epsilon(1e-13));
    const auto pi = marginal_from_law(law, m.d);
    for (double p : pi) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("small beta lands on a non-A-localized branch") {
    const ClockModel m = potts3(0.01);
    CHECK_THROWS_AS(solve_chain(m, {0, 1}), WrongBranchError);
    try {
        solve_chain(m, {0, 1});
    } catch (const WrongBranchError& e) {
        CHECK(e.outside_mass > 0.2);  // near-uniform: about 1/3 outside
        CHECK(e.A == std::vector<int>{0, 1});
    }
}

TEST_CASE("marginal exponent arithmetic") {
    BoundaryLaw law;
    law.u = {1.0, 1.0, 0.5};
    law.log_u = {0.0, 0.0, std::log(0.5)};
    const auto pi = marginal_from_law(law, 2);
    CHECK(pi[2] / pi[0] == doctest::Approx(std::pow(0.5, 1.5)).epsilon(1e-13));
    CHECK(pi[0] + pi[1] + pi[2] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("transition matrix is row-stochastic and positive") {
    const ClockModel m = potts3(6.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    for (int i = 0; i < 3; ++i) {
        double row = 0.0;
        for (int j = 0; j < 3; ++j) {
            CHECK(spec.P[i][j] > 0.0);
            row += spec.P[i][j];
        }
        CHECK(std::abs(row - 1.0) <= 1e-12);
    }
    // uniform marginal: identical diagonal by permutation symmetry
    const std::vector<double> uni(3, 1.0 / 3.0);
    const auto Pu = transition_matrix(m, uni);
    CHECK(Pu[0][0] == doctest::Approx(Pu[1][1]).epsilon(1e-13));
    CHECK(Pu[1][1] == doctest::Approx(Pu[2][2]).epsilon(1e-13));
}

TEST_CASE("detailed balance and stationarity") {
    const ClockModel m = potts3(6.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(spec.pi[i] * spec.P[i][j] - spec.pi[j] * spec.P[j][i]) <= 1e-10);
    for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int i = 0; i < 3; ++i) s += spec.pi[i] * spec.P[i][j];
        CHECK(std::abs(s - spec.pi[j]) <= 1e-10);
    }
}

TEST_CASE("solved marginal obeys the outside-mass bound at beta=3") {
    const ClockModel m = potts3(3.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const ConstantsBundle bundle = constants(m, 2);
    CHECK(spec.pi_outside() <= bundle.C1 * std::exp(-3.0 * 3.0));
}

TEST_CASE("localization report at beta=6 passes all four bounds") {
    const ClockModel m = potts3(6.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const ConstantsBundle bundle = constants(m, 2);
    const LocalizationReport rep = verify_localization(spec, m, bundle);
    CHECK(rep.conditioned);
    CHECK(rep.all_pass);
    for (const auto& b : rep.bounds) CHECK(b.margin > 0.0);
    // (iii) with the explicit constant
    CHECK(spec.pi_outside() <= bundle.C1 * std::exp(-3.0 * 6.0));
    // (ii)
    CHECK(std::min(spec.P[0][0], spec.P[1][1]) > 1.0 - bundle.C2 * std::exp(-6.0));
}

TEST_CASE("A = Z_q report: outside mass is exactly zero") {
    const ClockModel m = potts3(6.0);
    const ChainSpec spec = solve_chain(m, {0, 1, 2});
    CHECK(spec.pi_outside() == 0.0);
    const ConstantsBundle bundle = constants(m, 3);
    const LocalizationReport rep = verify_localization(spec, m, bundle);
    const auto& iii = rep.bounds[2];
    CHECK(iii.lhs == 0.0);
    CHECK(iii.pass);
}

TEST_CASE("below the epsilon <= eta threshold the report is unconditioned") {
    const ClockModel m = potts3(1.6);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const ConstantsBundle bundle = constants(m, 2);
    const LocalizationReport rep = verify_localization(spec, m, bundle);
    CHECK_FALSE(rep.conditioned);  // epsilon(1.6) = 0.32 > eta(2,2) = 0.152
}

TEST_CASE("relabeling equivariance under rotation") {
    const ClockModel m = build_model(5, 2, 4.0, {0.0, 1.0, 1.2});
    const ChainSpec s0 = solve_chain(m, {0, 1});
    const ChainSpec s1 = solve_chain(m, {2, 3});  // rotation by 2
    const int q = 5, r = 2;
    for (int i = 0; i < q; ++i) {
        CHECK(s1.pi[(i + r) % q] == doctest::Approx(s0.pi[i]).epsilon(1e-10));
        for (int j = 0; j < q; ++j)
            CHECK(s1.P[(i + r) % q][(j + r) % q] ==
                  doctest::Approx(s0.P[i][j]).epsilon(1e-10));
    }
}

TEST_CASE("DLR consistency on the depth-2 tree") {
    // conditional of the root given everything else under the explicit
    // Markov measure equals the one-point Gibbs kernel ~ prod_y Q(i - w_y)
    const ClockModel m = potts3(3.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const int q = 3;

    // enumerate the 9 non-root vertices: 3 at level 1, 6 at level 2
    std::vector<int> rest(9, 0);
    bool more = true;
    while (more) {
        double joint[3];
        for (int i = 0; i < q; ++i) {
            double w = spec.pi[i];
            for (int c = 0; c < 3; ++c) w *= spec.P[i][rest[c]];
            for (int c = 0; c < 3; ++c)
                for (int g = 0; g < 2; ++g) w *= spec.P[rest[c]][rest[3 + 2 * c + g]];
            joint[i] = w;
        }
        double gibbs[3];
        for (int i = 0; i < q; ++i) {
            double w = 1.0;
            for (int c = 0; c < 3; ++c) w *= std::exp(m.log_transfer(i - rest[c]));
            gibbs[i] = w;
        }
        double zj = joint[0] + joint[1] + joint[2];
        double zg = gibbs[0] + gibbs[1] + gibbs[2];
        for (int i = 0; i < q; ++i)
            CHECK(std::abs(joint[i] / zj - gibbs[i] / zg) <= 1e-10);

        int pos = 8;
        while (pos >= 0 && ++rest[pos] == q) rest[pos--] = 0;
        more = pos >= 0;
    }
}

TEST_CASE("spectral gap closed form and oracle") {
    // symmetric 2-state chain: eigenvalues 1 and 1-2p
    const double p = 0.3;
    const std::vector<std::vector<double>> P2 = {{1 - p, p}, {p, 1 - p}};
    const std::vector<double> pi2 = {0.5, 0.5};
    CHECK(spectral_gap(P2, pi2) == doctest::Approx(1.0 - 2.0 * p).epsilon(1e-11));

    const ClockModel m = potts3(6.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    CHECK(spec.lambda2 < 1.0);
    CHECK(spec.lambda2 >= 0.0);

    // dense Jacobi eigensolver on the symmetrized matrix
    std::vector<std::vector<double>> S(3, std::vector<double>(3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            S[i][j] = std::sqrt(spec.pi[i] / spec.pi[j]) * spec.P[i][j];
    const auto ev = oracles::jacobi_eigenvalues(S);
    double second = 0.0;
    for (double e : ev)
        if (std::abs(e) < 1.0 - 1e-9) second = std::max(second, std::abs(e));
    CHECK(spec.lambda2 == doctest::Approx(second).epsilon(1e-8));
}

TEST_CASE("chain spec JSON round trip is byte-stable") {
    const ClockModel m = potts3(6.0);
    const ChainSpec spec = solve_chain(m, {0, 1});
    const std::string once = chain_spec_to_json(spec);
    const ChainSpec back = chain_spec_from_json(once);
    const std::string twice = chain_spec_to_json(back);
    CHECK(once == twice);
    for (int i = 0; i < 3; ++i) {
        CHECK(back.pi[i] == spec.pi[i]);  // bit-equal
        for (int j = 0; j < 3; ++j) CHECK(back.P[i][j] == spec.P[i][j]);
    }
}

TEST_CASE("chain invariants across randomly drawn admissible models") {
    Rng rng(2718);
    int solved = 0;
    for (int trial = 0; trial < 24; ++trial) {
        const int q = 3 + static_cast<int>(rng.next_u64() % 4);  // 3..6
        const int d = 2 + static_cast<int>(rng.next_u64() % 2);  // 2..3
        std::vector<double> ubar(q / 2 + 1);
        ubar[0] = 0.0;
        for (size_t k = 1; k < ubar.size(); ++k) ubar[k] = 1.0 + 0.3 * rng.next_double();
        const double beta = 4.0 + 4.0 * rng.next_double();
        const ClockModel m = build_model(q, d, beta, ubar);
        const int nA = 2 + static_cast<int>(rng.next_u64() % 2);
        std::vector<int> A;
        const int start = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(q));
        for (int k = 0; k < nA; ++k) A.push_back((start + k) % q);

        ChainSpec spec;
        try {
            spec = solve_chain(m, A);
        } catch (const WrongBranchError&) {
            continue;  // this beta does not carry the A-branch
        }
        ++solved;
        double total = 0.0;
        for (int i = 0; i < q; ++i) {
            CHECK(spec.pi[i] > 0.0);
            total += spec.pi[i];
            double row = 0.0;
            for (int j = 0; j < q; ++j) {
                CHECK(spec.P[i][j] > 0.0);
                row += spec.P[i][j];
                CHECK(std::abs(spec.pi[i] * spec.P[i][j] - spec.pi[j] * spec.P[j][i]) <=
                      1e-10);
            }
            CHECK(std::abs(row - 1.0) <= 1e-12);
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
        CHECK(spec.residual <= 1e-13);
        CHECK(spec.lambda2 <= 1.0);
        CHECK(spec.pi_outside() < 0.5);
    }
    CHECK(solved >= 12);  // the grid is chosen deep enough for most draws
}

TEST_CASE("solver input validation") {
    const ClockModel m = potts3(3.0);
    CHECK_THROWS_AS(solve_boundary_law(m, {0}), ModelError);
    CHECK_THROWS_AS(solve_boundary_law(m, {0, 3}), ModelError);
    CHECK_THROWS_AS(solve_boundary_law(m, {0, 0}), ModelError);
    CHECK_THROWS_AS(solve_boundary_law(m, {0, 1}, 1e-13, 2), NoConvergenceError);
}
