#ifndef MATSIM_ERRORS_HPP
#define MATSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace matsim {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A standing hypothesis on a model function failed. `location` is the
/// maturity (or parameter value) where the check failed, NaN when the
/// failure is not tied to a point.
class HypothesisViolation : public Error {
 public:
  HypothesisViolation(std::string which, double location, std::string detail);

  const std::string& which() const noexcept { return which_; }
  double location() const noexcept { return location_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string which_;
  double location_;
  std::string detail_;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

class RootNotBracketed : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class StepSizeUnderflow : public Error {
 public:
  using Error::Error;
};

class SearchInconclusive : public Error {
 public:
  using Error::Error;
};

class FixedPointDivergence : public Error {
 public:
  using Error::Error;
};

class HistoryUnderflow : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace matsim

#endif  // MATSIM_ERRORS_HPP
