#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace apstag {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Fields, direction sets or grids that do not belong together.
class ShapeMismatch : public Error {
public:
    using Error::Error;
};

/// Negative or nonfinite cross sections, or a total cross section that the
/// requested operation cannot handle.
class InvalidMaterial : public Error {
public:
    using Error::Error;
};

/// A step produced nonfinite values or the density grew past the blow-up
/// threshold. Carries the step index and the time reached when detected.
class NumericOverflow : public Error {
public:
    NumericOverflow(const std::string& what, std::size_t step, double time)
        : Error(what), step_(step), time_(time) {}

    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    std::size_t step_;
    double time_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace apstag
