#pragma once

// Direct simulation of both games from the population model, used as an
// independent check on the analytic sums.
//
// Trials are split into fixed chunks; each chunk keeps a Welford mean/M2
// and chunks are merged in index order, so an estimate depends only on
// (seed, trials, params) and never on the number of threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "votelab/errors.hpp"
#include "votelab/game.hpp"
#include "votelab/rng.hpp"
#include "votelab/sampling.hpp"

namespace votelab {

struct SimConfig {
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 0;
    unsigned threads = 0; // 0: hardware concurrency

    void validate() const {
        if (trials < 1) throw domain_error("trials must be at least 1");
    }
};

struct Estimate {
    double mean = 0.0;
    double std_err = 0.0; // sample standard deviation / sqrt(trials)
    std::uint64_t trials = 0;
};

enum class TrialOutcome { win, lose, tie_win, tie_lose };

constexpr bool good_wins(TrialOutcome o) noexcept {
    return o == TrialOutcome::win || o == TrialOutcome::tie_win;
}

/// How the two scenarios of the voting-gain estimator are drawn: sharing
/// (D, V), per-vote uniforms and the tie coin, or fully independently.
enum class GainSampling { common, independent };

namespace detail {

// Stream tags keep the estimators on disjoint substreams of one seed.
enum : std::uint32_t {
    stream_win_delegation = 1,
    stream_gain_common = 2,
    stream_gain_vote = 3,
    stream_gain_delegate = 4,
    stream_win_conventional = 5,
    stream_welfare_delegation = 6,
    stream_welfare_conventional = 7,
};

inline constexpr std::uint64_t chunk_trials = 1u << 16;

struct Moments {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) noexcept {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }

    void merge(const Moments& o) noexcept {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double n1 = static_cast<double>(count);
        const double n2 = static_cast<double>(o.count);
        const double d = o.mean - mean;
        const double n = n1 + n2;
        mean += d * n2 / n;
        m2 += o.m2 + d * d * n1 * n2 / n;
        count += o.count;
    }
};

template <class TrialFn>
Estimate run_trials(const SimConfig& sim, TrialFn trial) {
    sim.validate();
    const std::uint64_t chunks = (sim.trials + chunk_trials - 1) / chunk_trials;
    std::vector<Moments> parts(chunks);

    auto work_chunk = [&](std::uint64_t c) {
        const std::uint64_t first = c * chunk_trials;
        const std::uint64_t last = std::min(sim.trials, first + chunk_trials);
        Moments m;
        for (std::uint64_t t = first; t < last; ++t) m.push(trial(t));
        parts[c] = m;
    };

    unsigned threads = sim.threads != 0 ? sim.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));
    if (threads <= 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) work_chunk(c);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i) {
            pool.emplace_back([&] {
                for (std::uint64_t c; (c = next.fetch_add(1)) < chunks;) work_chunk(c);
            });
        }
        for (auto& t : pool) t.join();
    }

    Moments total;
    for (const auto& p : parts) total.merge(p);
    Estimate e;
    e.mean = total.mean;
    e.trials = total.count;
    e.std_err = total.count > 1
                    ? std::sqrt(total.m2 / static_cast<double>(total.count - 1) / static_cast<double>(total.count))
                    : 0.0;
    return e;
}

// Good side with `good` votes against `bad`; ties go to the coin.
inline TrialOutcome compare(std::uint64_t good, std::uint64_t bad, bool coin_heads) noexcept {
    if (good > bad) return TrialOutcome::win;
    if (good < bad) return TrialOutcome::lose;
    return coin_heads ? TrialOutcome::tie_win : TrialOutcome::tie_lose;
}

inline double indicator(TrialOutcome o) noexcept { return good_wins(o) ? 1.0 : 0.0; }

struct DelegationDraw {
    std::uint64_t voters = 0;
    std::uint64_t delegators = 0;
    TrialOutcome outcome = TrialOutcome::lose;
};

inline DelegationDraw draw_delegation(TrialRng& rng, const GameParams& params, double gamma) {
    const auto f = static_cast<std::uint64_t>(params.f());
    DelegationDraw d;
    d.voters = sample_poisson(rng, params.n() * (1.0 - gamma));
    d.delegators = sample_poisson(rng, params.n() * gamma);
    const double to_good = static_cast<double>(d.voters) / static_cast<double>(d.voters + f);
    const std::uint64_t h = sample_binomial(rng, d.delegators, to_good);
    const std::uint64_t good = d.voters + h;
    const std::uint64_t bad = f + d.delegators - h;
    d.outcome = compare(good, bad, good == bad && rng.uniform() < 0.5);
    return d;
}

} // namespace detail

/// One election under delegation rate gamma: V voters and D delegators,
/// h of the D delegated votes land on well-behaving voters.
inline TrialOutcome simulate_delegation_trial(TrialRng& rng, const GameParams& params, double gamma) {
    detail::require_unit_interval(gamma, "gamma");
    return detail::draw_delegation(rng, params, gamma).outcome;
}

inline Estimate estimate_win_prob(const GameParams& params, double gamma, const SimConfig& sim) {
    detail::require_unit_interval(gamma, "gamma");
    return detail::run_trials(sim, [&](std::uint64_t t) {
        TrialRng rng(sim.seed, t, detail::stream_win_delegation);
        return detail::indicator(detail::draw_delegation(rng, params, gamma).outcome);
    });
}

/// Gain of voting over delegating for one agent added to the population.
/// Voting: its own vote plus h ~ Bin(D, (V+1)/(V+1+f)) delegated votes.
/// Delegating: h ~ Bin(D+1, V/(V+f)) out of D+1 delegated votes.
inline Estimate estimate_voting_gain(const GameParams& params, double gamma, const SimConfig& sim,
                                     GainSampling mode = GainSampling::common) {
    detail::require_unit_interval(gamma, "gamma");
    const auto f = static_cast<std::uint64_t>(params.f());
    const double n = params.n();

    if (mode == GainSampling::common) {
        return detail::run_trials(sim, [&](std::uint64_t t) {
            TrialRng rng(sim.seed, t, detail::stream_gain_common);
            const std::uint64_t V = sample_poisson(rng, n * (1.0 - gamma));
            const std::uint64_t D = sample_poisson(rng, n * gamma);
            const double p_vote = static_cast<double>(V + 1) / static_cast<double>(V + 1 + f);
            const double p_delegate = static_cast<double>(V) / static_cast<double>(V + f);
            std::uint64_t h_vote = 0;
            std::uint64_t h_delegate = 0;
            for (std::uint64_t j = 0; j <= D; ++j) {
                const double u = rng.uniform();
                if (j < D && u < p_vote) ++h_vote;
                if (u < p_delegate) ++h_delegate;
            }
            const bool coin = rng.uniform() < 0.5;
            const auto vote = detail::compare(V + 1 + h_vote, f + D - h_vote, coin);
            const auto delegate = detail::compare(V + h_delegate, f + D + 1 - h_delegate, coin);
            return detail::indicator(vote) - detail::indicator(delegate);
        });
    }

    return detail::run_trials(sim, [&](std::uint64_t t) {
        TrialRng r1(sim.seed, t, detail::stream_gain_vote);
        const std::uint64_t V1 = sample_poisson(r1, n * (1.0 - gamma));
        const std::uint64_t D1 = sample_poisson(r1, n * gamma);
        const std::uint64_t h1 =
            sample_binomial(r1, D1, static_cast<double>(V1 + 1) / static_cast<double>(V1 + 1 + f));
        const auto vote = detail::compare(V1 + 1 + h1, f + D1 - h1, r1.uniform() < 0.5);

        TrialRng r2(sim.seed, t, detail::stream_gain_delegate);
        const std::uint64_t V2 = sample_poisson(r2, n * (1.0 - gamma));
        const std::uint64_t D2 = sample_poisson(r2, n * gamma);
        const std::uint64_t h2 = sample_binomial(r2, D2 + 1, static_cast<double>(V2) / static_cast<double>(V2 + f));
        const auto delegate = detail::compare(V2 + h2, f + D2 + 1 - h2, r2.uniform() < 0.5);
        return detail::indicator(vote) - detail::indicator(delegate);
    });
}

inline Estimate estimate_win_prob_conventional(const GameParams& params, double alpha, const SimConfig& sim) {
    detail::require_unit_interval(alpha, "alpha");
    const auto f = static_cast<std::uint64_t>(params.f());
    return detail::run_trials(sim, [&](std::uint64_t t) {
        TrialRng rng(sim.seed, t, detail::stream_win_conventional);
        const std::uint64_t k = sample_poisson(rng, params.n() * alpha);
        return detail::indicator(detail::compare(k, f, k == f && rng.uniform() < 0.5));
    });
}

/// Per-capita welfare r(pop) (pop * gain - voters * c). Delegation: pop =
/// D + V. Conventional: N ~ Poisson(n) agents of whom k ~ Bin(N, alpha) vote.
inline Estimate estimate_welfare(const GameParams& params, double strategy, Game game, const SimConfig& sim) {
    detail::require_unit_interval(strategy, game == Game::delegation ? "gamma" : "alpha");
    const double c = params.c();
    if (game == Game::delegation) {
        return detail::run_trials(sim, [&](std::uint64_t t) {
            TrialRng rng(sim.seed, t, detail::stream_welfare_delegation);
            const auto d = detail::draw_delegation(rng, params, strategy);
            const std::uint64_t pop = d.voters + d.delegators;
            if (pop == 0) return 0.0;
            return detail::indicator(d.outcome) - c * static_cast<double>(d.voters) / static_cast<double>(pop);
        });
    }
    const auto f = static_cast<std::uint64_t>(params.f());
    return detail::run_trials(sim, [&](std::uint64_t t) {
        TrialRng rng(sim.seed, t, detail::stream_welfare_conventional);
        const std::uint64_t N = sample_poisson(rng, params.n());
        if (N == 0) return 0.0;
        const std::uint64_t k = sample_binomial(rng, N, strategy);
        const double gain = detail::indicator(detail::compare(k, f, k == f && rng.uniform() < 0.5));
        return gain - c * static_cast<double>(k) / static_cast<double>(N);
    });
}

} // namespace votelab
