#pragma once

// Log-space Poisson and binomial primitives plus the outcome helpers g and r.
//
// Densities use Loader's saddle-point form (Stirling error + deviance bd0),
// which stays accurate to a few ulps for large counts where the naive
// lambda^k e^-lambda / k! overflows and log-gamma differences cancel.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "votelab/errors.hpp"

namespace votelab {

/// A probability in [0, 1]. Tiny excursions caused by rounding are clamped;
/// anything further out is a numerical failure.
class Prob {
public:
    constexpr Prob() noexcept = default;

    explicit Prob(double v) : value_(v) {
        constexpr double slack = 1e-9;
        if (!(v >= -slack && v <= 1.0 + slack)) {
            throw numeric_error("probability out of range: " + std::to_string(v));
        }
        if (value_ < 0.0) value_ = 0.0;
        if (value_ > 1.0) value_ = 1.0;
    }

    constexpr double value() const noexcept { return value_; }
    constexpr operator double() const noexcept { return value_; }

private:
    double value_ = 0.0;
};

/// Budget for truncating the infinite Poisson sums. The neglected probability
/// mass of every truncated sum is bounded by tail_eps.
struct TruncationPolicy {
    static constexpr double default_tail_eps = 1e-10;
    static constexpr std::size_t default_max_terms = 200'000;

    double tail_eps = default_tail_eps;
    std::size_t max_terms = default_max_terms;

    void validate() const {
        if (!(tail_eps > 0.0 && tail_eps <= 1e-4)) {
            throw domain_error("tail_eps must lie in (0, 1e-4]");
        }
        if (max_terms < 16) throw domain_error("max_terms must be at least 16");
    }
};

namespace detail {

inline constexpr double ln_sqrt_2pi = 0.918938533204672741780329736406;

/// log(k!) - [(k + 1/2) log k - k + log sqrt(2 pi)] for integer k.
inline double stirling_error(std::uint64_t k) {
    static const std::array<double, 32> small = [] {
        std::array<double, 32> t{};
        // t[0] unused: densities special-case k = 0.
        for (std::size_t i = 1; i < t.size(); ++i) {
            const double x = static_cast<double>(i);
            t[i] = std::lgamma(x + 1.0) - (x + 0.5) * std::log(x) + x - ln_sqrt_2pi;
        }
        return t;
    }();
    if (k < small.size()) return small[k];

    constexpr double s0 = 1.0 / 12.0;
    constexpr double s1 = 1.0 / 360.0;
    constexpr double s2 = 1.0 / 1260.0;
    constexpr double s3 = 1.0 / 1680.0;
    constexpr double s4 = 1.0 / 1188.0;
    const double x = static_cast<double>(k);
    const double xx = x * x;
    if (k > 500) return (s0 - s1 / xx) / x;
    if (k > 80) return (s0 - (s1 - s2 / xx) / xx) / x;
    if (k > 35) return (s0 - (s1 - (s2 - s3 / xx) / xx) / xx) / x;
    return (s0 - (s1 - (s2 - (s3 - s4 / xx) / xx) / xx) / xx) / x;
}

/// Deviance term x log(x / mean) + mean - x, evaluated without cancellation
/// when x is close to mean.
inline double deviance(double x, double mean) {
    if (std::abs(x - mean) < 0.1 * (x + mean)) {
        double v = (x - mean) / (x + mean);
        double s = (x - mean) * v;
        double ej = 2.0 * x * v;
        v *= v;
        for (int j = 1; j < 1000; ++j) {
            ej *= v;
            const double s1 = s + ej / (2 * j + 1);
            if (s1 == s) return s1;
            s = s1;
        }
        return s;
    }
    return x * std::log(x / mean) + mean - x;
}

inline double log_factorial(std::uint64_t k) {
    if (k < 2) return 0.0;
    const double x = static_cast<double>(k);
    return stirling_error(k) + (x + 0.5) * std::log(x) - x + ln_sqrt_2pi;
}

/// Poisson density without argument validation.
inline double poisson_density(double lambda, std::uint64_t k) {
    if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
    if (k == 0) return std::exp(-lambda);
    const double x = static_cast<double>(k);
    return std::exp(-stirling_error(k) - deviance(x, lambda)) /
           std::sqrt(2.0 * std::numbers::pi * x);
}

/// Binomial density with success probability p and failure probability q
/// (passed separately so callers can avoid forming 1 - p).
inline double binomial_density(std::uint64_t m, double p, double q, std::uint64_t k) {
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (q == 0.0) return k == m ? 1.0 : 0.0;
    const double mm = static_cast<double>(m);
    if (k == 0) return std::exp(mm * (p < 0.1 ? std::log1p(-p) : std::log(q)));
    if (k == m) return std::exp(mm * (q < 0.1 ? std::log1p(-q) : std::log(p)));
    const double x = static_cast<double>(k);
    const double y = mm - x;
    const double lc = stirling_error(m) - stirling_error(k) - stirling_error(m - k) -
                      deviance(x, mm * p) - deviance(y, mm * q);
    return std::exp(lc) * std::sqrt(mm / (2.0 * std::numbers::pi * x * y));
}

/// E[w(2X - t)] for X ~ Bin(m, p) with w(z) = 1 for z > 0, 1/2 for z = 0,
/// 0 for z < 0; that is P[X > t/2] + 1/2 P[X = t/2], the tie term present
/// only for even t. Terms are generated by the multiplicative recurrence
/// outward from the mode; the sweep stops once terms fall below 1e-25.
inline double tie_weighted_upper_tail(std::uint64_t m, double p, double q, std::int64_t t) {
    const auto twice_m = static_cast<std::int64_t>(2 * m);
    if (t < 0) return 1.0;
    if (t > twice_m) return 0.0;
    if (p <= 0.0) return t == 0 ? 0.5 : 0.0;
    if (q <= 0.0) return t == twice_m ? 0.5 : 1.0;

    constexpr double negligible = 1e-25;
    const auto lowest = static_cast<std::uint64_t>((t + 1) / 2); // ceil(t/2)
    const bool has_tie = (t % 2) == 0;
    const auto weight = [&](std::uint64_t k) {
        if (k < lowest) return 0.0;
        if (has_tie && k == lowest) return 0.5;
        return 1.0;
    };

    const double mm = static_cast<double>(m);
    const auto mode = std::min<std::uint64_t>(m, static_cast<std::uint64_t>((mm + 1.0) * p));
    const double at_mode = binomial_density(m, p, q, mode);
    const double up = p / q;
    const double down = q / p;

    double sum = 0.0;
    double term = at_mode;
    for (std::uint64_t k = mode;; ++k) {
        sum += weight(k) * term;
        if (k == m) break;
        if (k > mode && term < negligible) break;
        term *= static_cast<double>(m - k) / static_cast<double>(k + 1) * up;
    }
    term = at_mode;
    for (std::uint64_t k = mode; k > lowest;) {
        term *= static_cast<double>(k) / static_cast<double>(m - k + 1) * down;
        --k;
        sum += weight(k) * term;
        if (term < negligible) break;
    }
    return sum;
}

} // namespace detail

/// Poisson pmf lambda^k e^-lambda / k!.
inline Prob poisson_pmf(double lambda, std::uint64_t k) {
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw domain_error("poisson_pmf: lambda must be finite and non-negative");
    }
    return Prob(detail::poisson_density(lambda, k));
}

/// Smallest K with P[X > K] < eps for X ~ Poisson(lambda). The scan starts at
/// the mode: upper tails are accumulated from the far right end so the tail
/// mass is never formed as 1 - cdf.
inline std::uint64_t poisson_trunc_point(double lambda, double eps) {
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw domain_error("poisson_trunc_point: lambda must be finite and non-negative");
    }
    if (!(eps > 0.0 && eps < 1.0)) throw domain_error("poisson_trunc_point: eps must lie in (0,1)");
    if (lambda == 0.0) return 0;

    const auto mode = static_cast<std::uint64_t>(std::floor(lambda));
    // Terms mode, mode+1, ... until negligible relative to eps and past the mean.
    std::vector<double> right;
    double term = detail::poisson_density(lambda, mode);
    std::uint64_t k = mode;
    const double cutoff = eps * 1e-6;
    for (;;) {
        right.push_back(term);
        const double next = term * lambda / static_cast<double>(k + 1);
        ++k;
        if (static_cast<double>(k) > lambda && next < cutoff) {
            // Geometric bound on everything from k onward.
            const double r = lambda / static_cast<double>(k + 1);
            right.push_back(next / (1.0 - r));
            break;
        }
        term = next;
    }
    // tail[i] = P[X > mode + i] (approximately; last slot holds the bound).
    std::vector<double> tail(right.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = right.size(); i-- > 0;) {
        tail[i] = acc;
        acc += right[i];
    }
    std::size_t i = 0;
    while (i < tail.size() && !(tail[i] < eps)) ++i;
    if (i > 0) return mode + i;

    // P[X > mode] < eps already: walk left while the tail stays below eps.
    double t = tail[0];
    double pk = right[0];
    std::uint64_t K = mode;
    while (K > 0) {
        const double with = t + pk; // P[X > K-1]
        if (!(with < eps)) break;
        t = with;
        pk *= static_cast<double>(K) / lambda;
        --K;
    }
    return K;
}

/// Binomial pmf C(m,k) pr^k (1-pr)^(m-k); pr in {0,1} give exact point masses.
inline Prob binomial_pmf(std::uint64_t m, double pr, std::uint64_t k) {
    if (!(pr >= 0.0 && pr <= 1.0)) throw domain_error("binomial_pmf: pr must lie in [0,1]");
    if (k > m) throw domain_error("binomial_pmf: k exceeds m");
    return Prob(detail::binomial_density(m, pr, 1.0 - pr, k));
}

/// Outcome gain g(x, y): 1 if x > y, 1/2 on a tie (fair coin), 0 otherwise.
constexpr double gain(std::uint64_t x, std::uint64_t y) noexcept {
    if (x > y) return 1.0;
    if (x == y) return 0.5;
    return 0.0;
}

/// r(x) = 1/x for x > 0 and r(0) = 0.
constexpr double reciprocal_or_zero(std::uint64_t x) noexcept {
    return x == 0 ? 0.0 : 1.0 / static_cast<double>(x);
}

namespace detail {

/// Pairwise (cascade) summation; result independent of how the caller
/// produced the terms, given a fixed order.
inline double pairwise_sum(const double* first, std::size_t count) {
    if (count <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) s += first[i];
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(first, half) + pairwise_sum(first + half, count - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

/// Poisson pmf values 0..K together with their total mass.
struct PoissonWeights {
    std::vector<double> pmf;
    double mass = 0.0;
};

inline PoissonWeights poisson_weights(double lambda, double eps, std::size_t max_terms) {
    const std::uint64_t K = poisson_trunc_point(lambda, eps);
    if (K > max_terms) throw truncation_cap_exceeded(K, max_terms);
    PoissonWeights w;
    w.pmf.resize(K + 1);
    for (std::uint64_t k = 0; k <= K; ++k) w.pmf[k] = poisson_density(lambda, k);
    w.mass = pairwise_sum(w.pmf);
    return w;
}

} // namespace detail

} // namespace votelab
