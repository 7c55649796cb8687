#pragma once

#include <stdexcept>
#include <string>

namespace ldpd {

// Argument outside the support of a distribution or parameter space.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Input data or configuration that violates a documented invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed file content; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Factorization failure, underflow of all weights, or an infeasible latent draw.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ldpd
