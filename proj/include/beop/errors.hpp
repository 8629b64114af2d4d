#pragma once

#include <stdexcept>
#include <string>

namespace beop {

// Bad user-supplied data: unreadable files, malformed instances, bad flags.
struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// No directed path between a requested node pair.
struct Disconnected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientNodes : InvalidInput {
    using InvalidInput::InvalidInput;
};

struct ResampleLimitExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An action outside the feasible set was handed to the MDP.
struct IllegalAction : std::logic_error {
    using std::logic_error::logic_error;
};

struct TooManySubtours : InvalidInput {
    using InvalidInput::InvalidInput;
};

struct RequiresSingleVehicle : InvalidInput {
    using InvalidInput::InvalidInput;
};

struct NonFiniteGradient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace beop
