#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "votelab/solver.hpp"

using namespace votelab;

TEST(FindRoots, TrivialCurves) {
    EXPECT_TRUE(find_roots([](double) { return 0.5; }, 0.14).empty());
    const auto r = find_roots([](double x) { return x; }, 0.25);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r[0], 0.25, 1e-10);
    // Roots at the corners are not interior.
    EXPECT_TRUE(find_roots([](double x) { return x; }, 0.0).empty());
    EXPECT_TRUE(find_roots([](double x) { return x; }, 1.0).empty());
}

TEST(FindRoots, UnimodalPivotalGainHasTwoRootsAroundPeak) {
    const GameParams params(30, 2, 0.14);
    const auto r = find_roots([&](double a) { return pivotal_gain(params, a); }, 0.14);
    ASSERT_EQ(r.size(), 2u);
    const double star = std::sqrt(2.0) / 30.0;
    EXPECT_LT(r[0], star);
    EXPECT_GT(r[1], star);
}

TEST(FindRoots, MergesNearDuplicates) {
    // Two sign changes 1e-8 apart collapse into one root.
    const auto r = find_roots([](double x) { return (x - 0.3) * (x - 0.3 - 1e-8); }, 0.0,
                              SolverConfig{401, 1e-12, 1e-6});
    EXPECT_LE(r.size(), 1u);
}

TEST(FindRoots, EvaluationFailureCarriesAbscissa) {
    try {
        find_roots(
            [](double x) {
                if (x > 0.5) throw numeric_error("boom");
                return x;
            },
            0.1);
        FAIL() << "expected curve_evaluation_error";
    } catch (const curve_evaluation_error& e) {
        EXPECT_GT(e.abscissa(), 0.5);
    }
    EXPECT_THROW(find_roots([](double) { return std::nan(""); }, 0.1), curve_evaluation_error);
}

TEST(SolverConfigType, Validation) {
    EXPECT_THROW((SolverConfig{50, 1e-10, 1e-6}.validate()), domain_error);
    EXPECT_THROW((SolverConfig{401, 1e-5, 1e-4}.validate()), domain_error);
    EXPECT_THROW((SolverConfig{401, 1e-8, 1e-9}.validate()), domain_error);
}

TEST(SolveConventional, MatchesHighPrecisionRoots) {
    struct Root {
        int f;
        double alpha, q, w;
    };
    // Roots of the pivotal gain = 0.14 at n = 30, solved at 40 digits.
    const Root expected[] = {
        {2, 0.011177645278119208126, 0.025000042396783370809, 0.023435172057846828106},
        {2, 0.11898637535389528693, 0.78155964659337119937, 0.764901554043827418},
        {8, 0.2344851529469874499, 0.34092980512228278823, 0.30810188370970761716},
        {8, 0.26501472497737951663, 0.47031785826008604899, 0.43321579676325638853},
    };
    for (int f : {2, 8}) {
        const auto rep = solve_conventional(GameParams(30, f, 0.14));
        ASSERT_EQ(rep.roots.size(), 2u);
        EXPECT_EQ(rep.corner_note, CornerNote::none);
        int i = 0;
        for (const auto& e : expected) {
            if (e.f != f) continue;
            EXPECT_NEAR(rep.roots[i].strategy_prob, e.alpha, 1e-9);
            EXPECT_NEAR(rep.roots[i].win_prob.value(), e.q, 1e-9);
            EXPECT_NEAR(rep.roots[i].welfare, e.w, 1e-9);
            ++i;
        }
    }
}

TEST(SolveConventional, NoRootsAboveThePeak) {
    const auto nine = solve_conventional(GameParams(30, 9, 0.14));
    EXPECT_TRUE(nine.roots.empty());
    EXPECT_EQ(nine.corner_note, CornerNote::all_abstain_dominant);
    EXPECT_TRUE(solve_conventional(GameParams(30, 2, 0.60)).roots.empty());
}

TEST(SolveConventional, OneAdversary) {
    const auto rep = solve_conventional(GameParams(30, 1, 0.14));
    ASSERT_EQ(rep.roots.size(), 1u);
    EXPECT_NEAR(pivotal_gain(rep.params, rep.roots[0].strategy_prob), 0.14, 1e-9);
    EXPECT_EQ(solve_conventional(GameParams(30, 1, 0.5)).corner_note, CornerNote::all_abstain_dominant);
    EXPECT_EQ(solve_conventional(GameParams(30, 1, 1e-13)).corner_note, CornerNote::all_vote_dominant);
}

TEST(SolveConventional, RootCountTrichotomy) {
    for (int f = 2; f <= 10; ++f) {
        const double peak = pivotal_peak_value(f);
        for (double off : {-1e-2, -1e-6, -1e-10, -2e-12}) {
            EXPECT_EQ(solve_conventional(GameParams(30, f, peak + off)).roots.size(), 2u) << f << " " << off;
        }
        for (double off : {2e-12, 1e-10, 1e-6, 1e-2}) {
            EXPECT_EQ(solve_conventional(GameParams(30, f, peak + off)).roots.size(), 0u) << f << " " << off;
        }
    }
}

TEST(SolveDelegation, TwoEquilibriaAtTwoAdversaries) {
    const GameParams params(30, 2, 0.14);
    const auto rep = solve_delegation(params, SolverConfig{}, TruncationPolicy{1e-15, 200000});
    ASSERT_EQ(rep.roots.size(), 2u);
    for (const auto& r : rep.roots) {
        EXPECT_NEAR(static_cast<double>(oracle::xi(30, 2, r.strategy_prob)), 0.14, 1e-8);
        EXPECT_NEAR(r.win_prob.value(), static_cast<double>(oracle::win_delegation(30, 2, r.strategy_prob)), 1e-12);
    }
    EXPECT_LT(rep.roots[0].strategy_prob, rep.roots[1].strategy_prob);
    EXPECT_GT(rep.roots[0].win_prob.value(), rep.roots[1].win_prob.value());
}

TEST(SolveDelegation, CornerWhenNoEquilibrium) {
    const auto rep = solve_delegation(GameParams(30, 10, 0.14));
    EXPECT_TRUE(rep.roots.empty());
    EXPECT_EQ(rep.corner_note, CornerNote::all_delegate_dominant);
    EXPECT_EQ(solve_delegation(GameParams(30, 1, 0.14)).roots.size(), 1u);
}

TEST(SolveDelegation, RootsStraddleASignChange) {
    const SolverConfig cfg;
    for (int f = 1; f <= 5; ++f) {
        const GameParams params(30, f, 0.14);
        for (const auto& r : solve_delegation(params, cfg).roots) {
            const double lo = xi(params, r.strategy_prob - cfg.root_tol).xi - 0.14;
            const double hi = xi(params, r.strategy_prob + cfg.root_tol).xi - 0.14;
            EXPECT_LE(lo * hi, 0.0) << f << " " << r.strategy_prob;
        }
    }
}

TEST(SolveDelegation, Deterministic) {
    const GameParams params(30, 3, 0.14);
    const auto a = solve_delegation(params);
    const auto b = solve_delegation(params);
    ASSERT_EQ(a.roots.size(), b.roots.size());
    for (std::size_t i = 0; i < a.roots.size(); ++i) {
        EXPECT_EQ(a.roots[i].strategy_prob, b.roots[i].strategy_prob);
        EXPECT_EQ(a.roots[i].win_prob.value(), b.roots[i].win_prob.value());
        EXPECT_EQ(a.roots[i].welfare, b.roots[i].welfare);
    }
}

TEST(Sweep, FinerGridNeverLosesRoots) {
    const SolverConfig coarse;
    SolverConfig fine;
    fine.grid_points = 2 * coarse.grid_points;
    const auto a = sweep_f(30, 0.14, 1, 30, coarse);
    const auto b = sweep_f(30, 0.14, 1, 30, fine);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_GE(b[i].delegation->roots.size(), a[i].delegation->roots.size()) << a[i].f;
        EXPECT_GE(b[i].conventional->roots.size(), a[i].conventional->roots.size()) << a[i].f;
    }
}

TEST(Sweep, LowEquilibriumFavoursDelegation) {
    // At the low-turnout equilibria delegation wins more often than
    // conventional voting; at the high-turnout ones it does not (see README).
    const auto rows = sweep_f(30, 0.14, 1, 5);
    for (const auto& row : rows) {
        const auto d = table_cells(*row.delegation);
        const auto k = table_cells(*row.conventional);
        EXPECT_LT(*d.win1, *k.win1) << row.f;
        if (row.f >= 2) {
            EXPECT_GT(*d.win2, *k.win2) << row.f;
        }
    }
}

TEST(Sweep, RecordsRowErrorsAndContinues) {
    // max_terms = 16 cannot cover Poisson(30): every row fails, none throws.
    const auto rows = sweep_f(30, 0.14, 1, 3, SolverConfig{}, TruncationPolicy{1e-10, 16});
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) {
        EXPECT_FALSE(r.delegation);
        EXPECT_FALSE(r.delegation_error.empty());
    }
    EXPECT_THROW(sweep_f(30, 0.14, 5, 4), domain_error);
}

TEST(SampleCurve, EndpointsAndPeak) {
    const auto d = sample_curve(Game::delegation, GameParams(30, 1, 0.14), 3);
    ASSERT_EQ(d.values.size(), 3u);
    EXPECT_NEAR(d.values[0], 8.4686487868003580e-12, 1e-22);
    // Dropped Poisson tail mass is bounded by tail_eps.
    EXPECT_NEAR(d.values[2], 0.5, TruncationPolicy::default_tail_eps);
    EXPECT_EQ(d.cost_line, 0.14);

    const auto k = sample_curve(Game::conventional, GameParams(30, 2, 0.14), 1001);
    double top = 0.0;
    for (double v : k.values) top = std::max(top, v);
    EXPECT_LE(top, pivotal_peak_value(2) + 1e-10);
    EXPECT_NEAR(top, pivotal_peak_value(2), 1e-4);

    const auto two = sample_curve(Game::conventional, GameParams(30, 2, 0.14), 2);
    EXPECT_EQ(two.strategy_grid, (std::vector<double>{0.0, 1.0}));
    EXPECT_THROW(sample_curve(Game::delegation, GameParams(30, 1, 0.14), 1), domain_error);
}
