#pragma once

// Analytic evaluation of the delegation game. A well-behaving agent either
// votes or hands its vote to a uniformly random participant among the V + f
// who vote; D ~ Poisson(n gamma) delegate and V ~ Poisson(n (1 - gamma)) vote.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "votelab/game.hpp"
#include "votelab/probability.hpp"

namespace votelab {

struct DelegationPoint {
    double gamma = 0.0;
    double xi = 0.0;               ///< expected gain of voting over delegating
    double trunc_error_bound = 0.0; ///< neglected Poisson mass, bounds |error in xi|
};

struct DelegationOutcome {
    double gamma = 0.0;
    Prob win_prob;
    double welfare = 0.0;
    double trunc_error_bound = 0.0;
};

/// Inner bracket G_f(D, V) of the indifference condition: the change in the
/// probability that the good alternative wins when one extra agent votes
/// instead of delegating, with D delegators and V voters besides it.
///
///   G = P[X1 > a1] + 1/2 P[X1 = a1] - P[X2 > a2] - 1/2 P[X2 = a2]
///   X1 ~ Bin(D, (V+1)/(V+1+f)),   a1 = (f + D - V - 1)/2
///   X2 ~ Bin(D+1, V/(V+f)),       a2 = (f + D + 1 - V)/2
///
/// Tie terms only contribute when a1 (a2) is an integer. G vanishes outside
/// the band f - 1 - D <= V <= f + D + 1.
inline double g_f_term(std::int64_t f, std::uint64_t delegators, std::uint64_t voters) {
    if (f < 1) throw domain_error("g_f_term: f must be at least 1");
    const auto D = static_cast<std::int64_t>(delegators);
    const auto V = static_cast<std::int64_t>(voters);
    if (V >= f + D + 2 || V + D <= f - 2) return 0.0;

    const double fv = static_cast<double>(f);
    const double vv = static_cast<double>(V);
    const double voting = detail::tie_weighted_upper_tail(
        delegators, (vv + 1.0) / (vv + 1.0 + fv), fv / (vv + 1.0 + fv), f + D - V - 1);
    const double delegating = detail::tie_weighted_upper_tail(
        delegators + 1, vv / (vv + fv), fv / (vv + fv), f + D + 1 - V);
    return voting - delegating;
}

/// Right-hand side of the delegation indifference condition at gamma.
/// D and V are each truncated at a certified point with tail mass tail_eps/2;
/// since |G| <= 1 the reported bound covers the truncation error.
inline DelegationPoint xi(const GameParams& params, double gamma, const TruncationPolicy& trunc = {}) {
    detail::require_unit_interval(gamma, "gamma");
    trunc.validate();
    const double n = params.n();
    const std::int64_t f = params.f();
    const auto wd = detail::poisson_weights(n * gamma, trunc.tail_eps / 2, trunc.max_terms);
    const auto wv = detail::poisson_weights(n * (1.0 - gamma), trunc.tail_eps / 2, trunc.max_terms);
    const auto kv = static_cast<std::int64_t>(wv.pmf.size()) - 1;

    std::vector<double> stripes(wd.pmf.size(), 0.0);
    for (std::size_t d = 0; d < wd.pmf.size(); ++d) {
        const auto D = static_cast<std::int64_t>(d);
        const std::int64_t lo = std::max<std::int64_t>(0, f - 1 - D);
        const std::int64_t hi = std::min<std::int64_t>(kv, f + D + 1);
        double stripe = 0.0;
        for (std::int64_t V = lo; V <= hi; ++V) {
            stripe += wv.pmf[static_cast<std::size_t>(V)] *
                      g_f_term(f, d, static_cast<std::uint64_t>(V));
        }
        stripes[d] = wd.pmf[d] * stripe;
    }

    DelegationPoint pt;
    pt.gamma = gamma;
    pt.xi = std::clamp(detail::pairwise_sum(stripes), -1.0, 1.0);
    pt.trunc_error_bound = std::max(0.0, 1.0 - wd.mass * wv.mass);
    return pt;
}

/// Winning probability and per-capita welfare in one pass over (D, V).
/// Given (D, V), h ~ Bin(D, V/(V+f)) delegated votes reach well-behaving
/// voters; the good side has V + h votes against f + D - h.
inline DelegationOutcome evaluate_delegation(const GameParams& params, double gamma,
                                             const TruncationPolicy& trunc = {}) {
    detail::require_unit_interval(gamma, "gamma");
    trunc.validate();
    const double n = params.n();
    const std::int64_t f = params.f();
    const double c = params.c();
    const auto wd = detail::poisson_weights(n * gamma, trunc.tail_eps / 2, trunc.max_terms);
    const auto wv = detail::poisson_weights(n * (1.0 - gamma), trunc.tail_eps / 2, trunc.max_terms);
    const double fv = static_cast<double>(f);

    std::vector<double> win_stripes(wd.pmf.size(), 0.0);
    std::vector<double> welfare_stripes(wd.pmf.size(), 0.0);
    for (std::size_t d = 0; d < wd.pmf.size(); ++d) {
        const auto D = static_cast<std::int64_t>(d);
        double win = 0.0;
        double welfare = 0.0;
        for (std::size_t v = 0; v < wv.pmf.size(); ++v) {
            const auto V = static_cast<std::int64_t>(v);
            const double vv = static_cast<double>(V);
            const double wins =
                detail::tie_weighted_upper_tail(d, vv / (vv + fv), fv / (vv + fv), f + D - V);
            win += wv.pmf[v] * wins;
            if (D + V > 0) {
                welfare += wv.pmf[v] * (wins - c * vv / static_cast<double>(D + V));
            }
        }
        win_stripes[d] = wd.pmf[d] * win;
        welfare_stripes[d] = wd.pmf[d] * welfare;
    }

    DelegationOutcome out;
    out.gamma = gamma;
    out.win_prob = Prob(detail::pairwise_sum(win_stripes));
    out.welfare = detail::pairwise_sum(welfare_stripes);
    out.trunc_error_bound = std::max(0.0, 1.0 - wd.mass * wv.mass);
    return out;
}

inline Prob win_prob_delegation(const GameParams& params, double gamma,
                                const TruncationPolicy& trunc = {}) {
    return evaluate_delegation(params, gamma, trunc).win_prob;
}

inline double welfare_delegation(const GameParams& params, double gamma,
                                 const TruncationPolicy& trunc = {}) {
    return evaluate_delegation(params, gamma, trunc).welfare;
}

} // namespace votelab
