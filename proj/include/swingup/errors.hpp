#pragma once

#include <stdexcept>
#include <string>

namespace swingup {

// Thrown when a Fock occupation falls outside its truncation window, or a
// coherent state loses more than the allowed norm to truncation.
class WindowTooSmall : public std::invalid_argument {
public:
    explicit WindowTooSmall(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when two states (or a state and a config) disagree on the basis.
class BasisMismatch : public std::invalid_argument {
public:
    explicit BasisMismatch(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown by the dense reference propagator when the basis is too large for
// dense linear algebra.
class DimensionTooLarge : public std::invalid_argument {
public:
    explicit DimensionTooLarge(const std::string& what) : std::invalid_argument(what) {}
};

class UnknownPreset : public std::invalid_argument {
public:
    explicit UnknownPreset(const std::string& what) : std::invalid_argument(what) {}
};

// Config-file syntax problems (bad key, malformed value). Carries line/key
// diagnostics in the message.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// A syntactically valid configuration that violates an invariant
// (occupation outside window, dt too large, ...). Lists every violation.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace swingup
