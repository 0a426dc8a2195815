#pragma once

// Exact Poisson and binomial variates. Small means use inversion; large
// means use Hoermann's transformed rejection (PTRS for Poisson, BTRS for the
// binomial), the same methods numpy ships.

#include <cmath>
#include <cstdint>

#include "votelab/probability.hpp"
#include "votelab/rng.hpp"

namespace votelab {

inline std::uint64_t sample_poisson(TrialRng& rng, double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 30.0) {
        double p = std::exp(-lambda);
        double cdf = p;
        const double u = rng.uniform();
        std::uint64_t k = 0;
        while (u > cdf && p > 0.0) {
            ++k;
            p *= lambda / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kd);
        if (kd < 0.0 || (us < 0.013 && v > us)) continue;
        const auto k = static_cast<std::uint64_t>(kd);
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            -lambda + kd * loglam - detail::log_factorial(k)) {
            return k;
        }
    }
}

namespace detail {

// Binomial(m, p) for p <= 1/2.
inline std::uint64_t binomial_lower_half(TrialRng& rng, std::uint64_t m, double p) {
    const double mm = static_cast<double>(m);
    const double q = 1.0 - p;
    if (mm * p < 10.0) {
        double pk = std::exp(mm * std::log1p(-p));
        double cdf = pk;
        const double u = rng.uniform();
        const double ratio = p / q;
        std::uint64_t k = 0;
        while (u > cdf && k < m && pk > 0.0) {
            pk *= static_cast<double>(m - k) / static_cast<double>(k + 1) * ratio;
            ++k;
            cdf += pk;
        }
        return k;
    }

    const double spq = std::sqrt(mm * p * q);
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = mm * p + 0.5;
    const double vr = 0.92 - 4.2 / b;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double lpq = std::log(p / q);
    const auto mode = static_cast<std::uint64_t>(std::floor((mm + 1.0) * p));
    const double h = log_factorial(mode) + log_factorial(m - mode);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + c);
        if (kd < 0.0 || kd > mm) continue;
        const auto k = static_cast<std::uint64_t>(kd);
        if (us >= 0.07 && v <= vr) return k;
        v = std::log(v * alpha / (a / (us * us) + b));
        if (v <= h - log_factorial(k) - log_factorial(m - k) + (kd - static_cast<double>(mode)) * lpq) return k;
    }
}

} // namespace detail

inline std::uint64_t sample_binomial(TrialRng& rng, std::uint64_t m, double p) {
    if (m == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return m;
    if (p > 0.5) return m - detail::binomial_lower_half(rng, m, 1.0 - p);
    return detail::binomial_lower_half(rng, m, p);
}

} // namespace votelab
