#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace glasd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument or configuration value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// Zero-variance column or otherwise unusable data.
class DegenerateData : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (CSV, config, provenance record).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Raised when the objective throws or returns a non-finite value.
/// Carries the point at which the evaluation failed.
class ObjectiveError : public Error {
 public:
  ObjectiveError(const std::string& what, std::vector<double> point)
      : Error(what), point_(std::move(point)) {}
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

/// Failure inside one simulation replicate.
class ReplicateError : public Error {
 public:
  ReplicateError(const std::string& what, std::size_t replicate)
      : Error(what), replicate_(replicate) {}
  std::size_t replicate() const noexcept { return replicate_; }

 private:
  std::size_t replicate_;
};

}  // namespace glasd
