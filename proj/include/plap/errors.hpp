#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace plap {

/// Raised when a parameter set cannot produce a valid quasiradial construction.
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an operation is called outside its domain (bad radius, bad window, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative procedure fails to converge. Carries the residual history.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

}  // namespace plap
