#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tvpqr {

/// Invalid distribution or model parameters.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Result not representable (e.g. the quantile function at 0 or 1).
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

/// A rejection sampler exceeded its iteration cap.
class SamplerFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical breakdown tied to a specific period (filter blow-up, failed factorization).
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::ptrdiff_t index)
        : std::runtime_error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

    std::ptrdiff_t index() const noexcept { return index_; }

private:
    std::ptrdiff_t index_;
};

/// Caller broke a documented precondition (e.g. non-monotone quantiles passed to density smoothing).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed input data or configuration.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tvpqr
