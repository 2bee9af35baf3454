#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aerogeo {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A value outside the mathematical domain of an operation (negative
/// altitude, latitude beyond the poles, non-finite input).
class DomainError : public Error {
public:
  using Error::Error;
};

/// The viewing ray is parallel to or above the horizon and never meets the
/// water plane.
class HorizonError : public Error {
public:
  using Error::Error;
};

/// Longitude scale collapses to zero at the poles.
class SingularityError : public Error {
public:
  using Error::Error;
};

/// Invalid scenario, grid or run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Filesystem failure (unreadable input, unwritable output).
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace aerogeo
