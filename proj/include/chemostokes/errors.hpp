#pragma once

#include <stdexcept>
#include <string>

namespace chemostokes {

// Precondition / size-contract violations (programming errors at call sites).
class ContractError : public std::runtime_error {
public:
    explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

// A physical-assumption check failed on user inputs. `assumption` names the
// violated requirement (e.g. "mu_positive", "n0_not_identically_zero").
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string assumption, const std::string& what)
        : std::runtime_error(what), assumption_(std::move(assumption)) {}
    const std::string& assumption() const { return assumption_; }

private:
    std::string assumption_;
};

// Iterative/direct solver failed to meet its tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_ = 0.0;
};

// Non-finite values or other numerical breakdown inside an update.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Blow-up guard tripped (norm or time-step abort threshold).
class BlowupError : public std::runtime_error {
public:
    BlowupError(const std::string& what, double t, long step)
        : std::runtime_error(what), t_(t), step_(step) {}
    double t() const { return t_; }
    long step() const { return step_; }

private:
    double t_ = 0.0;
    long step_ = 0;
};

// File / stream format problems.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace chemostokes
