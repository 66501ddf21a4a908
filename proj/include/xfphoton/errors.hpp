#pragma once

#include <stdexcept>
#include <string>

namespace xfp {

/// Invalid user input: malformed config, bad parameters, missing files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical invariant was violated during a run (norm loss, boundary
/// amplitude, fully masked frame, ...).
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace xfp
