#ifndef CHAINLAB_ERRORS_HPP
#define CHAINLAB_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace chainlab {

/// A state update produced a non-finite value. `index` is the iteration whose
/// update overflowed and `chain` names the offending component ('x', 'y', or
/// '?' when a scalar kernel is used on its own).
class NonFinite : public std::runtime_error {
public:
    NonFinite(std::int64_t index, char chain)
        : std::runtime_error("non-finite state at iteration " + std::to_string(index) +
                             " (chain " + std::string(1, chain) + ")"),
          index_(index), chain_(chain) {}

    std::int64_t index() const noexcept { return index_; }
    char chain() const noexcept { return chain_; }

private:
    std::int64_t index_;
    char chain_;
};

class DomainViolation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Detector failures. The CLI maps all three onto a single exit code.
class DetectorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateSeries : public DetectorError {
public:
    using DetectorError::DetectorError;
};

class SingularDesign : public DetectorError {
public:
    using DetectorError::DetectorError;
};

class InsufficientNeighbors : public DetectorError {
public:
    using DetectorError::DetectorError;
};

/// Invalid experiment configuration (unknown keys, bad ranges, missing fields).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace chainlab

#endif  // CHAINLAB_ERRORS_HPP
