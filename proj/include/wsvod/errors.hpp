#pragma once

#include <stdexcept>
#include <string>

namespace wsvod {

// Malformed or missing data on disk (manifests, frames, checkpoints).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values reached the optimizer.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace wsvod
