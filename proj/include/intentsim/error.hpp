#pragma once

#include <stdexcept>
#include <string>

namespace intentsim {

// Configuration / input rejection; the CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Everything else that goes wrong at runtime; CLI exit code 2.
struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All-zero detection counts in a consensus round.
struct DegenerateVisibilityError : SimError {
    DegenerateVisibilityError() : SimError("all detection counts are zero") {}
};

}  // namespace intentsim
