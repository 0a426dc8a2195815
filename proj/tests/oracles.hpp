#pragma once

// Reference computations written straight from the model definitions, in
// long double, sharing no code with the library. Slow but simple.

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline long double log_fact(int k) { return std::lgamma(static_cast<long double>(k) + 1.0L); }

inline long double pois(long double lambda, int k) {
    if (lambda == 0.0L) return k == 0 ? 1.0L : 0.0L;
    return std::exp(k * std::log(lambda) - lambda - log_fact(k));
}

inline long double binom(int m, long double p, int h) {
    if (p == 0.0L) return h == 0 ? 1.0L : 0.0L;
    if (p == 1.0L) return h == m ? 1.0L : 0.0L;
    return std::exp(log_fact(m) - log_fact(h) - log_fact(m - h) + h * std::log(p) + (m - h) * std::log1p(-p));
}

inline long double g(long long x, long long y) {
    if (x > y) return 1.0L;
    if (x == y) return 0.5L;
    return 0.0L;
}

inline int cutoff(long double lambda) {
    return static_cast<int>(lambda + 14.0L * std::sqrt(lambda) + 40.0L);
}

/// Expected gain of voting over delegating, summed over D, V and h.
inline long double xi(double n, int f, double gamma) {
    const long double ld = static_cast<long double>(n) * gamma;
    const long double lv = static_cast<long double>(n) * (1.0L - gamma);
    long double s = 0.0L;
    for (int D = 0; D <= cutoff(ld); ++D) {
        const long double pd = pois(ld, D);
        for (int V = 0; V <= cutoff(lv); ++V) {
            const long double w = pd * pois(lv, V);
            if (w == 0.0L) continue;
            const long double p1 = static_cast<long double>(V + 1) / (V + 1 + f);
            const long double p2 = static_cast<long double>(V) / (V + f);
            long double a = 0.0L;
            for (int h = 0; h <= D; ++h) a += binom(D, p1, h) * g(V + 1 + h, f + D - h);
            long double b = 0.0L;
            for (int h = 0; h <= D + 1; ++h) b += binom(D + 1, p2, h) * g(V + h, f + D + 1 - h);
            s += w * (a - b);
        }
    }
    return s;
}

/// Winning probability under delegation rate gamma.
inline long double win_delegation(double n, int f, double gamma) {
    const long double ld = static_cast<long double>(n) * gamma;
    const long double lv = static_cast<long double>(n) * (1.0L - gamma);
    long double s = 0.0L;
    for (int D = 0; D <= cutoff(ld); ++D) {
        const long double pd = pois(ld, D);
        for (int V = 0; V <= cutoff(lv); ++V) {
            const long double w = pd * pois(lv, V);
            if (w == 0.0L) continue;
            const long double p = static_cast<long double>(V) / (V + f);
            long double a = 0.0L;
            for (int h = 0; h <= D; ++h) a += binom(D, p, h) * g(V + h, f + D - h);
            s += w * a;
        }
    }
    return s;
}

/// E[V / (D + V); D + V > 0] = (1 - gamma)(1 - e^-n), so
/// W = p - c (1 - gamma)(1 - e^-n).
inline long double welfare_delegation(double n, int f, double c, double gamma) {
    return win_delegation(n, f, gamma) - c * (1.0L - gamma) * -std::expm1(-static_cast<long double>(n));
}

/// q = 1 - P[k <= f-1] - P[k = f]/2 with k ~ Poisson(n alpha); finite sum.
inline long double win_conventional(double n, int f, double alpha) {
    const long double l = static_cast<long double>(n) * alpha;
    if (l == 0.0L) return 0.0L;
    long double below = 0.0L;
    for (int k = 0; k < f; ++k) below += pois(l, k);
    return 1.0L - below - 0.5L * pois(l, f);
}

inline long double welfare_conventional(double n, int f, double c, double alpha) {
    if (alpha == 0.0) return 0.0L;
    return win_conventional(n, f, alpha) - c * alpha * -std::expm1(-static_cast<long double>(n));
}

inline long double pivotal_gain(double n, int f, double alpha) {
    const long double l = static_cast<long double>(n) * alpha;
    return 0.5L * (pois(l, f) + pois(l, f - 1));
}

/// P[X >= k] for X ~ Poisson(lambda), by direct upward summation.
inline long double poisson_tail_from(long double lambda, int k) {
    long double s = 0.0L;
    for (int j = k; j < k + 2000; ++j) {
        const long double t = pois(lambda, j);
        s += t;
        if (j > lambda && t < 1e-40L * s) break;
    }
    return s;
}

} // namespace oracle
