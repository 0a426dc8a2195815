#pragma once

// Interior mixed equilibria of both games: roots of (indifference curve - c)
// on the open unit interval, plus the table rows built from them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "votelab/conventional.hpp"
#include "votelab/delegation.hpp"
#include "votelab/errors.hpp"
#include "votelab/game.hpp"
#include "votelab/probability.hpp"

namespace votelab {

struct SolverConfig {
    static constexpr std::size_t default_grid_points = 401;

    std::size_t grid_points = default_grid_points;
    double root_tol = 1e-10;  // bisection width on the strategy variable
    double merge_tol = 1e-6;  // roots closer than this are one root

    void validate() const {
        if (grid_points < 51) throw domain_error("grid_points must be at least 51");
        if (!(root_tol > 0.0 && root_tol <= 1e-6)) throw domain_error("root_tol must lie in (0, 1e-6]");
        if (!(merge_tol >= root_tol)) throw domain_error("merge_tol must be at least root_tol");
    }
};

/// What the agents do when the indifference equation has no interior root.
/// all_vote_dominant covers the case the curve stays above the cost
/// everywhere (e.g. f = 1 with a cost below the alpha = 1 gain).
enum class CornerNote { none, all_delegate_dominant, all_abstain_dominant, all_vote_dominant };

constexpr std::string_view to_string(CornerNote note) noexcept {
    switch (note) {
    case CornerNote::all_delegate_dominant: return "all_delegate_dominant";
    case CornerNote::all_abstain_dominant: return "all_abstain_dominant";
    case CornerNote::all_vote_dominant: return "all_vote_dominant";
    case CornerNote::none: break;
    }
    return "none";
}

struct Equilibrium {
    double strategy_prob = 0.0; // gamma (delegation) or alpha (conventional)
    Prob win_prob;
    double welfare = 0.0;
};

struct EquilibriumReport {
    Game game = Game::delegation;
    GameParams params{1.0, 1, 1.0};
    std::vector<Equilibrium> roots; // sorted by strategy_prob
    CornerNote corner_note = CornerNote::none;
};

struct CurveSample {
    std::vector<double> strategy_grid;
    std::vector<double> values;
    double cost_line = 0.0;
};

namespace detail {

inline double grid_abscissa(std::size_t i, std::size_t points) {
    if (i + 1 == points) return 1.0;
    return static_cast<double>(i) / static_cast<double>(points - 1);
}

template <class F>
double evaluate_at(F& curve, double x) {
    double y;
    try {
        y = curve(x);
    } catch (const curve_evaluation_error&) {
        throw;
    } catch (const std::exception& e) {
        throw curve_evaluation_error(x, e.what());
    }
    if (!std::isfinite(y)) throw curve_evaluation_error(x, "non-finite value");
    return y;
}

/// Bisection on a bracket with h(lo), h(hi) of strictly opposite sign.
template <class F>
double bisect(F& curve, double target, double lo, double hi, double h_lo, double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double h_mid = evaluate_at(curve, mid) - target;
        if (h_mid == 0.0) return mid;
        if ((h_mid < 0.0) == (h_lo < 0.0)) {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// All interior roots of curve(x) = target on (0, 1): scan cfg.grid_points
/// uniform samples, bisect every sign change, merge near-duplicates.
template <class F>
std::vector<double> find_roots(F&& curve, double target, const SolverConfig& cfg = {}) {
    cfg.validate();
    const std::size_t m = cfg.grid_points;
    std::vector<double> xs(m);
    std::vector<double> hs(m);
    for (std::size_t i = 0; i < m; ++i) {
        xs[i] = detail::grid_abscissa(i, m);
        hs[i] = detail::evaluate_at(curve, xs[i]) - target;
    }

    std::vector<double> roots;
    for (std::size_t i = 0; i < m; ++i) {
        if (hs[i] == 0.0) roots.push_back(xs[i]);
        if (i + 1 < m && hs[i] != 0.0 && hs[i + 1] != 0.0 && (hs[i] < 0.0) != (hs[i + 1] < 0.0)) {
            roots.push_back(detail::bisect(curve, target, xs[i], xs[i + 1], hs[i], cfg.root_tol));
        }
    }

    std::vector<double> out;
    for (double r : roots) {
        if (!(r > 0.0 && r < 1.0)) continue;
        if (!out.empty() && r - out.back() < cfg.merge_tol) continue;
        out.push_back(r);
    }
    return out;
}

inline EquilibriumReport solve_delegation(const GameParams& params, const SolverConfig& cfg = {},
                                          const TruncationPolicy& trunc = {}) {
    cfg.validate();
    trunc.validate();
    const double c = params.c();
    bool all_below = true;
    bool all_above = true;
    auto curve = [&](double gamma) {
        const double v = xi(params, gamma, trunc).xi;
        all_below = all_below && v < c;
        all_above = all_above && v > c;
        return v;
    };
    const auto gammas = find_roots(curve, c, cfg);

    EquilibriumReport rep;
    rep.game = Game::delegation;
    rep.params = params;
    for (double g : gammas) {
        const auto o = evaluate_delegation(params, g, trunc);
        rep.roots.push_back({g, o.win_prob, o.welfare});
    }
    if (rep.roots.empty()) {
        if (all_below) rep.corner_note = CornerNote::all_delegate_dominant;
        else if (all_above) rep.corner_note = CornerNote::all_vote_dominant;
    }
    return rep;
}

/// Conventional equilibria from the shape of the pivotal gain: for f >= 2 it
/// rises from 0 to its peak at alpha* and falls afterwards, so each flank
/// holds at most one root; for f = 1 it decreases from 1/2.
inline EquilibriumReport solve_conventional(const GameParams& params, const SolverConfig& cfg = {},
                                            const TruncationPolicy& trunc = {}) {
    cfg.validate();
    trunc.validate();
    const double c = params.c();
    auto gain = [&](double a) { return pivotal_gain(params, a); };

    EquilibriumReport rep;
    rep.game = Game::conventional;
    rep.params = params;
    std::vector<double> alphas;

    // One root of gain = c on [lo, hi] when gain - c changes sign there.
    auto flank = [&](double lo, double hi) {
        const double h_lo = gain(lo) - c;
        const double h_hi = gain(hi) - c;
        if (h_lo == 0.0) alphas.push_back(lo);
        else if (h_hi == 0.0) alphas.push_back(hi);
        else if ((h_lo < 0.0) != (h_hi < 0.0)) {
            alphas.push_back(detail::bisect(gain, c, lo, hi, h_lo, cfg.root_tol));
        }
    };

    const double at_one = gain(1.0);
    if (params.f() == 1) {
        flank(0.0, 1.0);
        if (c >= 0.5) rep.corner_note = CornerNote::all_abstain_dominant;
        else if (c <= at_one) rep.corner_note = CornerNote::all_vote_dominant;
    } else {
        const auto peak = interior_max(params);
        const double top = gain(peak.alpha);
        if (c < top) {
            flank(0.0, peak.alpha);
            if (peak.interior) flank(peak.alpha, 1.0);
        } else if (c == top) {
            alphas.push_back(peak.alpha);
        } else {
            rep.corner_note = CornerNote::all_abstain_dominant;
        }
    }

    std::sort(alphas.begin(), alphas.end());
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) continue;
        if (!rep.roots.empty() && a == rep.roots.back().strategy_prob) continue;
        rep.roots.push_back({a, win_prob_conventional(params, a, trunc), welfare_conventional(params, a, trunc)});
    }
    if (!rep.roots.empty()) rep.corner_note = CornerNote::none;
    return rep;
}

inline EquilibriumReport solve(Game game, const GameParams& params, const SolverConfig& cfg = {},
                               const TruncationPolicy& trunc = {}) {
    return game == Game::delegation ? solve_delegation(params, cfg, trunc)
                                    : solve_conventional(params, cfg, trunc);
}

/// Table cells for one game: index 1 is the equilibrium with the higher
/// winning probability, index 2 the one with the lower.
struct TableCells {
    std::optional<double> win1, win2, welfare1, welfare2;
};

inline TableCells table_cells(const EquilibriumReport& rep) {
    TableCells t;
    if (rep.roots.empty()) return t;
    auto by_win = rep.roots;
    std::stable_sort(by_win.begin(), by_win.end(),
                     [](const Equilibrium& a, const Equilibrium& b) { return a.win_prob.value() > b.win_prob.value(); });
    t.win1 = by_win.front().win_prob.value();
    t.welfare1 = by_win.front().welfare;
    if (by_win.size() > 1) {
        t.win2 = by_win.back().win_prob.value();
        t.welfare2 = by_win.back().welfare;
    }
    return t;
}

struct SweepRow {
    std::int64_t f = 0;
    std::optional<EquilibriumReport> delegation;
    std::optional<EquilibriumReport> conventional;
    std::string delegation_error;   // set when delegation is empty
    std::string conventional_error; // set when conventional is empty
};

/// Both games for every f in [f_min, f_max]. A failing row records its error
/// and the sweep carries on.
inline std::vector<SweepRow> sweep_f(double n, double c, std::int64_t f_min, std::int64_t f_max,
                                     const SolverConfig& cfg = {}, const TruncationPolicy& trunc = {}) {
    if (f_min < 1 || f_max < f_min) throw domain_error("f range must satisfy 1 <= f_min <= f_max");
    const GameParams base(n, f_min, c);
    cfg.validate();
    trunc.validate();

    std::vector<SweepRow> rows;
    for (std::int64_t f = f_min; f <= f_max; ++f) {
        SweepRow row;
        row.f = f;
        const auto params = base.with_f(f);
        try {
            row.delegation = solve_delegation(params, cfg, trunc);
        } catch (const std::exception& e) {
            row.delegation_error = e.what();
        }
        try {
            row.conventional = solve_conventional(params, cfg, trunc);
        } catch (const std::exception& e) {
            row.conventional_error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Indifference curve on a uniform grid over [0, 1] with the cost as a
/// horizontal line, for plotting.
inline CurveSample sample_curve(Game game, const GameParams& params, std::size_t grid_points,
                                const TruncationPolicy& trunc = {}) {
    if (grid_points < 2) throw domain_error("grid_points must be at least 2");
    trunc.validate();
    CurveSample s;
    s.cost_line = params.c();
    s.strategy_grid.resize(grid_points);
    s.values.resize(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double x = detail::grid_abscissa(i, grid_points);
        s.strategy_grid[i] = x;
        s.values[i] = game == Game::delegation ? xi(params, x, trunc).xi : pivotal_gain(params, x);
    }
    return s;
}

} // namespace votelab
