#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "votelab/errors.hpp"

namespace votelab {

/// (n, f, c): Poisson mean of the well-behaving population, number of
/// misbehaving voters, and the voting cost.
class GameParams {
public:
    GameParams(double n, std::int64_t f, double c) : n_(n), f_(f), c_(c) {
        if (!(std::isfinite(n) && n > 0.0)) throw domain_error("n must be a positive finite number");
        if (f < 1) throw domain_error("f must be at least 1");
        if (!(c > 0.0 && c <= 1.0)) throw domain_error("c must lie in (0, 1]");
    }

    double n() const noexcept { return n_; }
    std::int64_t f() const noexcept { return f_; }
    double c() const noexcept { return c_; }

    GameParams with_cost(double c) const { return GameParams(n_, f_, c); }
    GameParams with_f(std::int64_t f) const { return GameParams(n_, f, c_); }

    friend bool operator==(const GameParams&, const GameParams&) = default;

private:
    double n_;
    std::int64_t f_;
    double c_;
};

enum class Game { delegation, conventional };

constexpr std::string_view to_string(Game g) noexcept {
    return g == Game::delegation ? "delegation" : "conventional";
}

namespace detail {

inline void require_unit_interval(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0)) throw domain_error(std::string(what) + " must lie in [0, 1]");
}

} // namespace detail

} // namespace votelab
