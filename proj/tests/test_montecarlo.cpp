#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "votelab/conventional.hpp"
#include "votelab/delegation.hpp"
#include "votelab/montecarlo.hpp"
#include "votelab/solver.hpp"

using namespace votelab;

TEST(Philox, KnownAnswers) {
    // Reference vectors shipped with Random123.
    const auto zero = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(zero, (Philox4x32::counter_type{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    const auto ones = Philox4x32::block({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u});
    EXPECT_EQ(ones, (Philox4x32::counter_type{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    const auto pi = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(pi, (Philox4x32::counter_type{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(TrialRngType, OpenUnitIntervalAndDistinctStreams) {
    TrialRng a(7, 0, 1), b(7, 1, 1), c(7, 0, 2), a2(7, 0, 1);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = a.uniform();
        EXPECT_GT(u, 0.0);
        EXPECT_LT(u, 1.0);
        EXPECT_EQ(u, a2.uniform());
        sum += u;
    }
    EXPECT_NEAR(sum / 10000, 0.5, 0.02);
    EXPECT_NE(b.next_u64(), c.next_u64());
}

namespace {

template <class Draw>
void check_moments(Draw draw, double mean, double var, int samples, const char* what) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = draw(static_cast<std::uint64_t>(i));
        s += x;
        s2 += x * x;
    }
    const double m = s / samples;
    const double v = s2 / samples - m * m;
    EXPECT_NEAR(m, mean, 5.0 * std::sqrt(var / samples) + 1e-12) << what;
    // Sample variance: relative sd about sqrt(2/samples) for near-normal data.
    EXPECT_NEAR(v, var, 6.0 * var * std::sqrt(3.0 / samples) + 1e-12) << what;
}

} // namespace

TEST(Sampling, PoissonMoments) {
    for (double lambda : {0.0, 0.4, 5.0, 29.9, 30.0, 100.0, 1e4}) {
        check_moments(
            [&](std::uint64_t t) {
                TrialRng r(99, t, 0);
                return static_cast<double>(sample_poisson(r, lambda));
            },
            lambda, lambda, 200000, "poisson");
    }
}

TEST(Sampling, PoissonFrequenciesAcrossMethods) {
    for (double lambda : {7.0, 45.0}) {
        const int samples = 400000;
        std::vector<int> counts(200, 0);
        for (int i = 0; i < samples; ++i) {
            TrialRng r(3, static_cast<std::uint64_t>(i), 0);
            const auto k = sample_poisson(r, lambda);
            if (k < counts.size()) ++counts[k];
        }
        for (std::uint64_t k = 0; k < counts.size(); ++k) {
            const double p = poisson_pmf(lambda, k);
            if (p < 1e-3) continue;
            EXPECT_NEAR(counts[k] / double(samples), p, 5.0 * std::sqrt(p * (1 - p) / samples)) << lambda << " " << k;
        }
    }
}

TEST(Sampling, BinomialMoments) {
    const std::pair<std::uint64_t, double> cases[] = {{0, 0.3}, {1, 0.5}, {12, 0.2},   {40, 0.2},
                                                      {40, 0.8}, {1000, 0.3}, {5000, 0.97}, {30, 1.0}};
    for (const auto& [m, p] : cases) {
        const double mean = static_cast<double>(m) * p;
        const double var = mean * (1.0 - p);
        check_moments(
            [&](std::uint64_t t) {
                TrialRng r(17, t, 0);
                return static_cast<double>(sample_binomial(r, m, p));
            },
            mean, var, 200000, "binomial");
    }
}

TEST(Sampling, BinomialFrequenciesRejectionBranch) {
    const std::uint64_t m = 60;
    const double p = 0.35;
    const int samples = 400000;
    std::vector<int> counts(m + 1, 0);
    for (int i = 0; i < samples; ++i) {
        TrialRng r(4, static_cast<std::uint64_t>(i), 0);
        ++counts[sample_binomial(r, m, p)];
    }
    for (std::uint64_t k = 0; k <= m; ++k) {
        const double q = binomial_pmf(m, p, k);
        if (q < 1e-3) continue;
        EXPECT_NEAR(counts[k] / double(samples), q, 5.0 * std::sqrt(q * (1 - q) / samples)) << k;
    }
}

TEST(MonteCarlo, DegenerateStrategiesAreExact) {
    const GameParams params(30, 2, 0.14);
    const SimConfig sim{20000, 1, 1};
    EXPECT_EQ(estimate_win_prob(params, 1.0, sim).mean, 0.0);
    EXPECT_EQ(estimate_welfare(params, 1.0, Game::delegation, sim).mean, 0.0);
    EXPECT_EQ(estimate_win_prob_conventional(params, 0.0, sim).mean, 0.0);
    TrialRng r(1, 0, 0);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(simulate_delegation_trial(r, params, 1.0), TrialOutcome::lose);
}

TEST(MonteCarlo, OverwhelmingAdversaryLoses) {
    const GameParams params(5, 200, 0.14);
    EXPECT_EQ(estimate_win_prob(params, 0.3, SimConfig{20000, 2, 1}).mean, 0.0);
}

TEST(MonteCarlo, SameSeedSameEstimateAnyThreadCount) {
    const GameParams params(30, 2, 0.14);
    const auto a = estimate_voting_gain(params, 0.6, SimConfig{300000, 42, 1});
    const auto b = estimate_voting_gain(params, 0.6, SimConfig{300000, 42, 4});
    const auto c = estimate_voting_gain(params, 0.6, SimConfig{300000, 42, 3});
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_err, b.std_err);
    EXPECT_EQ(a.mean, c.mean);
    EXPECT_EQ(a.trials, 300000u);
    const auto d = estimate_voting_gain(params, 0.6, SimConfig{300000, 43, 1});
    EXPECT_NE(a.mean, d.mean);
}

TEST(MonteCarlo, AgreesWithAnalyticAtSmallElectorate) {
    const GameParams params(5, 1, 0.14);
    const SimConfig sim{1000000, 2026, 0};
    const auto o = evaluate_delegation(params, 0.5);
    const auto p = estimate_win_prob(params, 0.5, sim);
    EXPECT_LE(std::abs(p.mean - o.win_prob.value()), 4 * p.std_err);
    const auto w = estimate_welfare(params, 0.5, Game::delegation, sim);
    EXPECT_LE(std::abs(w.mean - o.welfare), 4 * w.std_err);
    const auto g = estimate_voting_gain(params, 0.5, sim);
    EXPECT_LE(std::abs(g.mean - xi(params, 0.5).xi), 4 * g.std_err);
    const auto q = estimate_win_prob_conventional(params, 0.5, sim);
    EXPECT_LE(std::abs(q.mean - win_prob_conventional(params, 0.5).value()), 4 * q.std_err);
    const auto wc = estimate_welfare(params, 0.5, Game::conventional, sim);
    EXPECT_LE(std::abs(wc.mean - welfare_conventional(params, 0.5)), 4 * wc.std_err);
}

TEST(MonteCarlo, VotingGainAtFullDelegationIsHalf) {
    const auto g = estimate_voting_gain(GameParams(30, 1, 0.14), 1.0, SimConfig{100000, 5, 0});
    EXPECT_LE(std::abs(g.mean - 0.5), 4 * g.std_err);
}

TEST(MonteCarlo, VotingGainRecoversCostAtEquilibrium) {
    const GameParams params(30, 2, 0.14);
    const auto rep = solve_delegation(params);
    ASSERT_EQ(rep.roots.size(), 2u);
    for (const auto& r : rep.roots) {
        const auto g = estimate_voting_gain(params, r.strategy_prob, SimConfig{1000000, 77, 0});
        EXPECT_LE(std::abs(g.mean - 0.14), 4 * g.std_err) << r.strategy_prob;
    }
}

TEST(MonteCarlo, CommonRandomNumbersReduceVariance) {
    for (double n : {5.0, 30.0}) {
        for (int f : {1, 2, 5}) {
            for (double gamma : {0.1, 0.5, 0.9}) {
                const GameParams params(n, f, 0.14);
                const SimConfig sim{200000, 9, 0};
                const auto crn = estimate_voting_gain(params, gamma, sim, GainSampling::common);
                const auto ind = estimate_voting_gain(params, gamma, sim, GainSampling::independent);
                EXPECT_LE(crn.std_err, ind.std_err) << n << " " << f << " " << gamma;
            }
        }
    }
}

TEST(MonteCarlo, TableEquilibriaAgainstPublishedValues) {
    const SimConfig sim{1000000, 31, 0};
    const GameParams two(30, 2, 0.14);
    const auto d = solve_delegation(two);
    ASSERT_EQ(d.roots.size(), 2u);
    const auto p = estimate_win_prob(two, d.roots[0].strategy_prob, sim);
    EXPECT_LE(std::abs(p.mean - 0.76), 4 * p.std_err);
    const auto w = estimate_welfare(two, d.roots[0].strategy_prob, Game::delegation, sim);
    EXPECT_LE(std::abs(w.mean - 0.74), std::max(4 * w.std_err, 0.015));

    const GameParams eight(30, 8, 0.14);
    const auto k = solve_conventional(eight);
    ASSERT_EQ(k.roots.size(), 2u);
    const auto q = estimate_win_prob_conventional(eight, k.roots[1].strategy_prob, sim);
    EXPECT_LE(std::abs(q.mean - 0.45), std::max(4 * q.std_err, 0.03));
}

TEST(SimConfigType, RejectsZeroTrials) {
    EXPECT_THROW(estimate_win_prob(GameParams(5, 1, 0.1), 0.5, SimConfig{0, 1, 1}), domain_error);
}
