#pragma once

#include <stdexcept>
#include <string>

namespace micromotion {

/// Base class for all library errors. `exit_code()` maps onto the CLI's
/// process exit status.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// Invalid or inconsistent physical/numerical configuration.
class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// A numerical procedure failed to converge or violated an internal check.
class NumericalError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// A requested quantity lies outside what the computed basis/window covers.
class ScopeError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

/// API misuse (mismatched dimensions, grids, etc.).
class UsageError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

}  // namespace micromotion
