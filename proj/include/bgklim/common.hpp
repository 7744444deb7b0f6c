// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace bgklim {

// Invalid user input: bad config values, malformed tables, unusable parameters.
struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Violation of a structural hypothesis on the model data (coefficient sign,
// velocity sign conditions, ...). Construction-time rejection.
struct hypothesis_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A solver-internal invariant failed beyond tolerance. Indicates a bug in the
// implementation (or an out-of-regime configuration), never a user error.
struct integrity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double clamp01(double s) { return s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s); }

inline double pos_part(double s) { return s > 0.0 ? s : 0.0; }
inline double neg_part(double s) { return s < 0.0 ? -s : 0.0; }

} // namespace bgklim
