#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ltk {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A function was evaluated outside its domain (ln of a non-positive
/// number, division by zero, NaN produced, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation does not hold (wrong partition, a
/// Hamiltonian that is not homogeneous, non-physical parameters, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The normalising costate of a chart is (numerically) zero.
class ChartDegenerateError : public Error {
 public:
  ChartDegenerateError(int chart, int suggested)
      : Error("chart " + std::to_string(chart) + " is degenerate at this point (costate p" +
              std::to_string(chart) + " ~ 0); try chart " + std::to_string(suggested)),
        chart_(chart),
        suggested_(suggested) {}

  int chart() const { return chart_; }
  int suggested_chart() const { return suggested_; }

 private:
  int chart_;
  int suggested_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : Error("syntax error at offset " + std::to_string(offset) + ": " + message),
        offset_(offset) {}

  /// 1-based byte offset into the source.
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class BindError : public Error {
 public:
  using Error::Error;
};

/// Failure while integrating a vector field, stamped with the time reached.
class IntegrationError : public Error {
 public:
  IntegrationError(double time, const std::string& message)
      : Error("integration failed at t=" + std::to_string(time) + ": " + message), time_(time) {}

  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace ltk
