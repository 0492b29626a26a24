#pragma once

#include <stdexcept>
#include <string>

namespace gibbs_ground {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A lattice, enumeration or state vector would exceed a configured cap.
class SizeLimitError : public Error {
 public:
  SizeLimitError(const std::string& what, std::size_t cap)
      : Error(what + " (cap = " + std::to_string(cap) + ")"), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

/// Structural constraint violated in user input (overlapping sets, duplicate keys).
class ConstraintError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Two independent constructions of the same object disagree; indicates a builder bug.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class UnsupportedModelError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gibbs_ground
