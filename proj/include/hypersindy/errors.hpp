// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hypersindy {

// Base class for all library errors so callers can catch one type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Incompatible tensor/matrix shapes.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Math domain violations (log of nonpositive value, zero norm, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// API misuse: preconditions violated by the caller.
class ContractError : public Error {
public:
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

// A simulated or generated trajectory left the finite domain.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& msg, std::size_t step)
        : Error(msg + " at step " + std::to_string(step)), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

// Bad configuration files or unknown systems/splits.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Training aborted on a non-finite loss; carries the epoch and the component
// values at the failure for the diagnostic.
class TrainingNanError : public Error {
public:
    TrainingNanError(int epoch, double recon, double kl, double l0)
        : Error("training aborted: non-finite loss at epoch " + std::to_string(epoch) +
                " (reconstruction=" + std::to_string(recon) + ", kl=" + std::to_string(kl) +
                ", l0=" + std::to_string(l0) + ")"),
          epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

// File read/write failures.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace hypersindy
