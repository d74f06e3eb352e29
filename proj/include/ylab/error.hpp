#pragma once

#include <stdexcept>
#include <string>

namespace ylab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a precondition (mismatched models, bad sizes, ...).
class LogicError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed: non-convergence, instability, degeneracy.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration; carries the offending JSON field path.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace ylab
