#pragma once

// Large-electorate threshold machinery: Lambert W on both real branches,
// the Hoeffding-type lower bounds D* on the number of delegators, the
// Chernoff bound on Poisson upper tails, the adversary-size threshold f*
// and the population thresholds n_lo < D*/gamma < n_hi.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string_view>

#include "votelab/conventional.hpp"
#include "votelab/errors.hpp"
#include "votelab/game.hpp"
#include "votelab/solver.hpp"

namespace votelab {

namespace detail {

inline constexpr long double inv_e_l = 0.367879441171442321595523770161460867L;
inline constexpr double branch_point = -0.36787944117144233; // nearest double to -1/e

// Inputs this close to -1/e cannot be told apart from it in double precision.
inline bool at_branch_point(double x) {
    return std::abs(static_cast<long double>(x) + inv_e_l) <= 4.0L * std::numeric_limits<double>::epsilon() * inv_e_l;
}

// Series about the branch point in p = +-sqrt(2 (e x + 1)).
inline double branch_series(double x, bool lower) {
    const long double d = static_cast<long double>(x) + inv_e_l;
    double p = static_cast<double>(std::sqrt(2.0L * std::numbers::e_v<long double> * d));
    if (lower) p = -p;
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0 + p * (769.0 / 17280.0)))));
}

inline double halley(double x, double w) {
    for (int it = 0; it < 100; ++it) {
        const double ew = std::exp(w);
        const double r = w * ew - x;
        const double wp1 = w + 1.0;
        if (wp1 == 0.0 || r == 0.0) return w;
        const double step = r / (ew * wp1 - (w + 2.0) * r / (2.0 * wp1));
        const double next = w - step;
        if (!std::isfinite(next)) break;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(next)) return next;
        w = next;
    }
    if (std::isfinite(w)) return w;
    throw numeric_error("Lambert W iteration failed to converge");
}

// Newton on w + log|w| = log|x|, used where w e^w under- or overflows.
inline double log_newton(double log_abs_x, double w) {
    for (int it = 0; it < 100; ++it) {
        const double g = w + std::log(std::abs(w)) - log_abs_x;
        const double step = g / (1.0 + 1.0 / w);
        w -= step;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w)) return w;
    }
    return w;
}

} // namespace detail

/// Principal branch W0 on [-1/e, inf); W0(x) e^W0(x) = x and W0 >= -1.
inline double lambert_w0(double x) {
    if (std::isnan(x)) throw domain_error("lambert_w0: NaN argument");
    if (detail::at_branch_point(x)) return -1.0;
    if (x < detail::branch_point) throw domain_error("lambert_w0: argument below -1/e");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return x;
    if (x < -0.25) return detail::halley(x, detail::branch_series(x, false));
    if (x > 1e100) {
        const double l1 = std::log(x);
        const double l2 = std::log(l1);
        return detail::log_newton(l1, l1 - l2 + l2 / l1);
    }
    double w;
    if (x < 3.0) {
        w = std::log1p(x);
        if (x < 0.0) w = x * (1.0 - x); // two-term series near 0
    } else {
        const double l1 = std::log(x);
        const double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }
    return detail::halley(x, w);
}

/// Lower branch W-1 on [-1/e, 0); values in (-inf, -1].
inline double lambert_wm1(double x) {
    if (std::isnan(x)) throw domain_error("lambert_wm1: NaN argument");
    if (detail::at_branch_point(x)) return -1.0;
    if (x < detail::branch_point || x >= 0.0) throw domain_error("lambert_wm1: argument outside [-1/e, 0)");
    if (x < -0.25) return detail::halley(x, detail::branch_series(x, true));
    const double l1 = std::log(-x);
    const double l2 = std::log(-l1);
    const double seed = l1 - l2 + l2 / l1;
    if (l1 < -300.0) return detail::log_newton(l1, seed);
    return detail::halley(x, seed);
}

/// Chernoff bound P[X >= x] <= e^-lambda (e lambda)^x / x^x for
/// X ~ Poisson(lambda), valid for x > lambda.
inline double poisson_upper_tail_bound(double lambda, double x) {
    if (!(std::isfinite(lambda) && lambda > 0.0)) throw domain_error("lambda must be positive and finite");
    if (!(std::isfinite(x) && x > lambda)) throw domain_error("bound requires x > lambda");
    return std::exp(-lambda + x * (1.0 + std::log(lambda / x)));
}

namespace detail {

inline double d_star_base(std::int64_t f, double slack, double c) {
    if (f < 1) throw domain_error("f must be at least 1");
    if (!(std::isfinite(slack) && slack > 0.0)) throw domain_error("slack must be positive");
    if (!(c > 0.0 && c <= 1.0)) throw domain_error("c must lie in (0, 1]");
    const double fv = static_cast<double>(f);
    return fv * fv / (slack * slack) * std::log(3.0 / c);
}

} // namespace detail

/// D* = (f / delta)^2 (8/9) log(3/c), the first-case lower bound on delegators.
inline double d_star_case1(std::int64_t f, double delta, double c) {
    return 8.0 / 9.0 * detail::d_star_base(f, delta, c);
}

/// D* = 8 (f / slack)^2 log(3/c); used with both the narrow and the wide slack.
inline double d_star_case2(std::int64_t f, double slack, double c) {
    return 8.0 * detail::d_star_base(f, slack, c);
}

/// Smallest integer f with f >= 18 / (e^2 pi) * delta^2 / c^2.
inline std::int64_t f_star(double c, double delta) {
    if (!(c > 0.0 && c <= 1.0)) throw domain_error("c must lie in (0, 1]");
    if (!(std::isfinite(delta) && delta >= 1.0)) throw domain_error("delta must be at least 1");
    constexpr double k = 18.0 / (std::numbers::e * std::numbers::e * std::numbers::pi);
    const double v = std::ceil(k * delta * delta / (c * c));
    if (!(v < 9.0e18)) throw numeric_error("f_star overflows a 64-bit integer");
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(v));
}

struct NThresholds {
    double n_lo = 0.0;
    double n_hi = 0.0;
};

/// n_{lo,hi} = -(D*/gamma) W_{0,-1}(-(1 - confidence)^(1/D*) / e). The
/// power is taken as exp(log1p(-confidence) / D*) so huge D* keeps its
/// distance from the branch point. confidence = 0 is the degenerate case
/// n_lo = n_hi = D*/gamma.
inline NThresholds n_thresholds(double d_star, double gamma, double confidence) {
    if (!(std::isfinite(d_star) && d_star > 0.0)) throw domain_error("d_star must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw domain_error("gamma must lie in (0, 1]");
    if (!(confidence >= 0.0 && confidence < 1.0)) throw domain_error("confidence must lie in [0, 1)");
    const double arg = -std::exp(std::log1p(-confidence) / d_star - 1.0);
    const double scale = d_star / gamma;
    return {-scale * lambert_w0(arg), -scale * lambert_wm1(arg)};
}

struct SlackParams {
    double delta = 1.0;
    double delta_tilde = 1.0;
    double sigma = 1.0;
    double confidence = 0.99;

    void validate() const {
        if (!(std::isfinite(delta) && delta > 0.0)) throw domain_error("delta must be positive");
        if (!(std::isfinite(delta_tilde) && delta_tilde > 0.0)) throw domain_error("delta_tilde must be positive");
        if (!(std::isfinite(sigma) && sigma > 0.0)) throw domain_error("sigma must be positive");
        if (!(confidence > 0.0 && confidence < 1.0)) throw domain_error("confidence must lie in (0, 1)");
    }
};

struct ThresholdReport {
    std::int64_t f_star = 1;
    double d_star = 0.0; // first-case bound, the one fed to n_thresholds
    double n_lo = 0.0;
    double n_hi = 0.0;
};

inline ThresholdReport threshold_report(double c, std::int64_t f, double gamma, const SlackParams& slack) {
    slack.validate();
    ThresholdReport r;
    r.f_star = f_star(c, slack.delta);
    r.d_star = d_star_case1(f, slack.delta, c);
    const auto n = n_thresholds(r.d_star, gamma, slack.confidence);
    r.n_lo = n.n_lo;
    r.n_hi = n.n_hi;
    return r;
}

enum class Regime { high_f_both_fail, moderate_f_conventional_only, low_f_numeric };

constexpr std::string_view to_string(Regime r) noexcept {
    switch (r) {
    case Regime::high_f_both_fail: return "high_f_both_fail";
    case Regime::moderate_f_conventional_only: return "moderate_f_conventional_only";
    case Regime::low_f_numeric: return "low_f_numeric";
    }
    return "low_f_numeric";
}

/// Delegation counts as failed when f >= f*(c, delta) or when it has no
/// interior equilibrium (solved numerically unless the caller passes the
/// root count). Conventional voting survives when c is in its solvability
/// interval.
inline Regime regime_classify(const GameParams& params, double delta,
                              std::optional<std::size_t> delegation_roots = std::nullopt) {
    const std::int64_t threshold = f_star(params.c(), delta);
    bool delegation_fails = params.f() >= threshold;
    if (!delegation_fails) {
        const std::size_t roots = delegation_roots ? *delegation_roots : solve_delegation(params).roots.size();
        delegation_fails = roots == 0;
    }
    if (!delegation_fails) return Regime::low_f_numeric;
    const bool conventional_ok = cost_solvability_interval(params.n(), params.f()).contains(params.c());
    return conventional_ok ? Regime::moderate_f_conventional_only : Regime::high_f_both_fail;
}

} // namespace votelab
