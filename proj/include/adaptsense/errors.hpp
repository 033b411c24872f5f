#pragma once

#include <stdexcept>
#include <string>

namespace adaptsense {

/// Invalid parameters: bad prior, bad dimensions, infeasible budget.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Caller passed mismatched shapes (e.g. vector length != signal length).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A sequential strategy was driven out of order.
class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A bound was evaluated outside the region where it is asserted.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace adaptsense
