#pragma once
#include <stdexcept>
#include <string>

namespace kinklab {

// config/usage problems: bad key, value out of admissible range, grid mismatch
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

// outside the perturbative regime: nu >= 1, missing bisection bracket, ...
struct RegimeError : std::runtime_error {
    explicit RegimeError(const std::string& m) : std::runtime_error(m) {}
};

// numerical failure: non-finite data, ill-conditioning, iteration cap
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& m) : std::runtime_error(m) {}
};

} // namespace kinklab
