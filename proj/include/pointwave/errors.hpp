#pragma once

#include <stdexcept>
#include <string>

namespace pointwave {

/// Bad parameters, malformed config, violated preconditions. CLI exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A requested computation needs data the inputs do not carry
/// (e.g. a Laplacian stack that was not provided).
struct CapabilityError : ValidationError {
    using ValidationError::ValidationError;
};

/// A numerical quality gate failed (route equivalence, solver convergence,
/// detected instability). CLI exit code 3.
struct QualityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem trouble, always carrying the offending path in the message.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int validation = 2;
inline constexpr int quality = 3;
inline constexpr int usage = 64;
} // namespace exit_code

} // namespace pointwave
