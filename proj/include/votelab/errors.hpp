#pragma once

#include <stdexcept>
#include <string>

namespace votelab {

/// Input outside the mathematical domain of an operation (negative rate,
/// k > m, cost outside (0,1], ...). Maps to a usage error at the CLI.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Requested structure does not exist, e.g. an interior maximum of the
/// pivotal gain for f = 1.
class structure_error : public domain_error {
public:
    using domain_error::domain_error;
};

/// Numerical failure: truncation cap exceeded, iteration did not converge,
/// curve evaluation failed. Maps to exit code 3 at the CLI.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class truncation_cap_exceeded : public numeric_error {
public:
    truncation_cap_exceeded(std::size_t needed, std::size_t cap)
        : numeric_error("truncation point " + std::to_string(needed) + " exceeds max_terms " +
                        std::to_string(cap)),
          needed_(needed), cap_(cap) {}

    std::size_t needed() const noexcept { return needed_; }
    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t needed_;
    std::size_t cap_;
};

class curve_evaluation_error : public numeric_error {
public:
    curve_evaluation_error(double abscissa, const std::string& what)
        : numeric_error("curve evaluation failed at x=" + std::to_string(abscissa) + ": " + what),
          abscissa_(abscissa) {}

    double abscissa() const noexcept { return abscissa_; }

private:
    double abscissa_;
};

} // namespace votelab
