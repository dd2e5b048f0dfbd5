#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace thinhom {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside the mathematical domain of an operation
/// (eps <= 0, non-positive thickness, non-positive coefficient, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inputs are individually valid but do not belong together
/// (e.g. a coefficient variant applied to a mesh of another target).
class ContractError : public Error {
public:
    using Error::Error;
};

class MeshError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, int iterations, double residual)
        : Error(what), iterations_(iterations), residual_(residual) {}

    [[nodiscard]] int iterations() const noexcept { return iterations_; }
    /// Relative residual ||r|| / ||b|| at the last iterate.
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// Raised when a horizontal slice leaves the domain; carries the failing x ranges.
class SliceError : public Error {
public:
    SliceError(const std::string& what, std::vector<std::pair<double, double>> ranges)
        : Error(what), ranges_(std::move(ranges)) {}

    [[nodiscard]] const std::vector<std::pair<double, double>>& failing_ranges() const noexcept
    {
        return ranges_;
    }

private:
    std::vector<std::pair<double, double>> ranges_;
};

}  // namespace thinhom
