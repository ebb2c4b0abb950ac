#pragma once

#include <stdexcept>
#include <string>

namespace synthvox {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Filesystem / OS level failures (open, read, write).
class IoError : public Error {
public:
  using Error::Error;
};

/// Malformed input files (NIfTI headers, meshes, sidecars, manifests).
class FormatError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration: bad ranges, recipe gating violations, unknown keys.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Mismatched or degenerate grid geometry.
class GeometryError : public Error {
public:
  using Error::Error;
};

} // namespace synthvox
