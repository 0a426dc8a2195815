#pragma once

// Conventional voting with abstention: each well-behaving agent votes with
// probability alpha, so k ~ Poisson(n alpha) good votes face f bad ones.

#include <cmath>
#include <cstdint>
#include <vector>

#include "votelab/game.hpp"
#include "votelab/probability.hpp"

namespace votelab {

struct ConventionalPoint {
    double alpha = 0.0;
    double gain_value = 0.0; ///< expected gain of voting over abstaining
};

/// Location and height of the maximum of the pivotal gain over alpha in [0,1].
/// interior == false means the stationary point lies beyond alpha = 1 and the
/// maximum sits on the boundary.
struct PivotalPeak {
    double alpha = 0.0;
    double gain_value = 0.0;
    bool interior = false;
};

/// Costs c for which the conventional indifference equation has a solution.
struct CostInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_inclusive = false;
    bool hi_inclusive = true;

    bool contains(double c) const noexcept {
        const bool above = lo_inclusive ? c >= lo : c > lo;
        const bool below = hi_inclusive ? c <= hi : c < hi;
        return above && below;
    }
};

/// Pivotal gain of one extra vote: 1/2 P[k = f] + 1/2 P[k = f - 1] with
/// k ~ Poisson(n alpha). Exact, no truncation.
inline double pivotal_gain(const GameParams& params, double alpha) {
    detail::require_unit_interval(alpha, "alpha");
    const double lambda = params.n() * alpha;
    const auto f = static_cast<std::uint64_t>(params.f());
    return 0.5 * detail::poisson_density(lambda, f) + 0.5 * detail::poisson_density(lambda, f - 1);
}

inline ConventionalPoint conventional_point(const GameParams& params, double alpha) {
    return {alpha, pivotal_gain(params, alpha)};
}

/// Height of the pivotal-gain maximum for f >= 2, independent of n:
///   1/2 e^{-s} (s^f / f! + s^{f-1} / (f-1)!),  s = sqrt(f (f-1)).
inline double pivotal_peak_value(std::int64_t f) {
    if (f < 2) throw structure_error("pivotal gain has no interior maximum for f < 2");
    const double fv = static_cast<double>(f);
    const double s = std::sqrt(fv * (fv - 1.0));
    const double ls = std::log(s);
    const auto fu = static_cast<std::uint64_t>(f);
    const double a = std::exp(fv * ls - s - detail::log_factorial(fu));
    const double b = std::exp((fv - 1.0) * ls - s - detail::log_factorial(fu - 1));
    return 0.5 * (a + b);
}

/// The unique stationary point alpha* = sqrt(f (f-1)) / n of the pivotal gain
/// and its value. For f = 1 the gain is decreasing and no interior maximum
/// exists.
inline PivotalPeak interior_max(const GameParams& params) {
    const std::int64_t f = params.f();
    if (f == 1) throw structure_error("f = 1: pivotal gain is decreasing, no interior maximum");
    const double fv = static_cast<double>(f);
    const double alpha_star = std::sqrt(fv * (fv - 1.0)) / params.n();
    if (alpha_star > 1.0) return {1.0, pivotal_gain(params, 1.0), false};
    return {alpha_star, pivotal_peak_value(f), true};
}

inline CostInterval cost_solvability_interval(double n, std::int64_t f) {
    // Validation only; the cost does not enter.
    const GameParams params(n, f, 1.0);
    if (f == 1) {
        return {0.5 * (n + 1.0) * std::exp(-n), 0.5, true, true};
    }
    return {0.0, interior_max(params).gain_value, false, true};
}

/// Winning probability q = P[k > f] + 1/2 P[k = f], k ~ Poisson(n alpha).
/// Summed upward from k = f until terms past the mode fall below 2^-60 of the
/// running total, so no tail mass is dropped at double precision.
inline Prob win_prob_conventional(const GameParams& params, double alpha,
                                  const TruncationPolicy& trunc = {}) {
    detail::require_unit_interval(alpha, "alpha");
    trunc.validate();
    const double lambda = params.n() * alpha;
    if (lambda == 0.0) return Prob(0.0);
    const auto f = static_cast<std::uint64_t>(params.f());

    std::vector<double> terms{0.5 * detail::poisson_density(lambda, f)};
    double acc = terms.front();
    for (std::uint64_t k = f + 1;; ++k) {
        const double t = detail::poisson_density(lambda, k);
        terms.push_back(t);
        acc += t;
        if (static_cast<double>(k) > lambda && t <= 0x1p-60 * acc) break;
        if (terms.size() > trunc.max_terms) throw truncation_cap_exceeded(terms.size(), trunc.max_terms);
    }
    return Prob(std::min(1.0, detail::pairwise_sum(terms)));
}

/// Per-capita welfare: N ~ Poisson(n) agents, k ~ Bin(N, alpha) of them vote.
///   W = sum_N P[N] r(N) sum_k Bin(N, alpha, k) (N g(k, f) - k c)
/// Thinning collapses the N-sum of the win term to q; the cost term leaves
/// c alpha P[N >= 1].
inline double welfare_conventional(const GameParams& params, double alpha,
                                   const TruncationPolicy& trunc = {}) {
    const double q = win_prob_conventional(params, alpha, trunc).value();
    return q + params.c() * alpha * std::expm1(-params.n());
}

} // namespace votelab
