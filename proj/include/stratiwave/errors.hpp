#pragma once

#include <stdexcept>
#include <string>

namespace stratiwave {

// Invalid parameters or malformed input files.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A layer hits (or is too close to) a vertical-mode resonance, so the
// boundary-value problems defining the modes are not solvable.
struct ResonanceError : std::runtime_error {
    explicit ResonanceError(const std::string& msg) : std::runtime_error(msg) {}
};

// An iteration failed to converge or a quantity left its admissible range.
struct NumericsError : std::runtime_error {
    explicit NumericsError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem failures (missing input, refusal to overwrite, write errors).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace stratiwave
