#pragma once

#include <stdexcept>
#include <string>

namespace fbme {

// Bad parameter value (H out of range, mismatched grids, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A smooth map does not provide enough derivatives for the requested order.
class CapabilityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class FactorizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite value produced during a recursion; carries the step where it appeared.
class OverflowError : public std::runtime_error {
public:
    OverflowError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

}  // namespace fbme
