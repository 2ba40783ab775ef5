#pragma once

#include <stdexcept>
#include <string>

#include "gradnorm/types.hpp"

namespace gradnorm {

/// Bad arguments: dimension mismatch, nonpositive constants, empty data.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The oracle cannot provide the requested derivative order.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value showed up while evaluating an oracle.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// The tensor-step subproblem did not reach its tolerance.
class SubproblemError : public std::runtime_error {
 public:
  SubproblemError(const std::string& what, Vector best, double best_grad_norm)
      : std::runtime_error(what), best_(std::move(best)), best_grad_norm_(best_grad_norm) {}
  const Vector& best_iterate() const { return best_; }
  double best_grad_norm() const { return best_grad_norm_; }

 private:
  Vector best_;
  double best_grad_norm_;
};

/// No L_k satisfying the two-sided displacement condition was found.
class LineSearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Restart schedule evaluation overflowed.
class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gradnorm
