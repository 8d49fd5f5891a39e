#pragma once

#include <stdexcept>
#include <string>

namespace qrad {

// Argument outside the documented domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Covariance matrix violates symmetry or the uncertainty principle.
class InvalidStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Requested target cannot be met (zero exponent, gain out of reach, ...).
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, double best_achievable = 0.0)
        : std::runtime_error(what), best_achievable_(best_achievable) {}

    double best_achievable() const noexcept { return best_achievable_; }

private:
    double best_achievable_;
};

// Device model used outside the regime it supports (e.g. hysteretic cells).
class UnsupportedRegimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Frequency at or above the ladder cutoff.
class EvanescentBandError : public DomainError {
public:
    EvanescentBandError(const std::string& what, double cutoff_hz)
        : DomainError(what), cutoff_hz_(cutoff_hz) {}

    double cutoff_hz() const noexcept { return cutoff_hz_; }

private:
    double cutoff_hz_;
};

// Coupled-mode integration produced non-finite fields.
class IntegrationDivergedError : public std::runtime_error {
public:
    IntegrationDivergedError(const std::string& what, double last_valid_position)
        : std::runtime_error(what), last_valid_position_(last_valid_position) {}

    double last_valid_position() const noexcept { return last_valid_position_; }

private:
    double last_valid_position_;
};

// Pump power dropped below the depletion guard; undepleted-pump assumptions no longer hold.
class PumpDepletedError : public std::runtime_error {
public:
    PumpDepletedError(const std::string& what, double position)
        : std::runtime_error(what), position_(position) {}

    double position() const noexcept { return position_; }

private:
    double position_;
};

}  // namespace qrad
