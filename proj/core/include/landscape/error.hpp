#pragma once

#include <stdexcept>
#include <string>

namespace lp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter layout does not match the network it is used with.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A loss evaluation produced a non-finite value.
class EvaluationError : public Error {
 public:
  explicit EvaluationError(const std::string& what, double alpha = 0.0)
      : Error(what), alpha_(alpha) {}

  /// Interpolation coefficient at which the failure occurred (0 outside probes).
  double alpha() const noexcept { return alpha_; }

 private:
  double alpha_;
};

class DataError : public Error {
 public:
  enum class Kind { Io, Format, Length, Consistency, Argument };

  DataError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class TrajectoryError : public Error {
 public:
  enum class Kind { Io, Format, Version, Digest, Truncated, Degenerate };

  TrajectoryError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace lp
