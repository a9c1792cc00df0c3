#pragma once

#include <stdexcept>
#include <string>

namespace jutila {

// CLI exit-code mapping: ValidationError -> 2, BudgetExceeded -> 3, UnsupportedTwist -> 4.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotCoprime : ValidationError {
    explicit NotCoprime(const std::string& msg) : ValidationError(msg) {}
};

struct DegenerateInterval : ValidationError {
    explicit DegenerateInterval(const std::string& msg) : ValidationError(msg) {}
};

struct BudgetExceeded : std::runtime_error {
    double achieved_error;
    explicit BudgetExceeded(const std::string& msg, double achieved = 0.0)
        : std::runtime_error(msg), achieved_error(achieved) {}
};

struct UnsupportedTwist : std::runtime_error {
    explicit UnsupportedTwist(const std::string& msg) : std::runtime_error(msg) {}
};

struct OverflowError : std::runtime_error {
    explicit OverflowError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace jutila
