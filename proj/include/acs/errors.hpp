#pragma once

#include <stdexcept>
#include <string>

namespace acs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on argument values was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Tensor or grid shapes do not satisfy a documented contract.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure (unreadable, unwritable, missing).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace acs
