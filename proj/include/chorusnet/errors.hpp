#pragma once

#include <stdexcept>
#include <string>

namespace chorusnet {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid arguments or violated preconditions (CLI maps these to exit code 2).
struct ParameterError : Error {
    using Error::Error;
};

// A metric that requires a connected graph was asked of a disconnected one.
struct ConnectivityError : Error {
    using Error::Error;
};

// Randomized construction exhausted its retry budget.
struct GenerationError : Error {
    using Error::Error;
};

// Malformed, insufficient, or inconsistent data at runtime.
struct DataError : Error {
    using Error::Error;
};

// Invalid model state (non-PSD covariance, scorer table miss, ...).
struct ModelError : Error {
    using Error::Error;
};

} // namespace chorusnet
