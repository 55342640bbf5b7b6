#ifndef THERMOPROBE_ERRORS_HPP
#define THERMOPROBE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace thermoprobe {

/// Argument outside the mathematical domain of an operation (e.g. T <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid optimizer, quadrature or constraint configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The average-variance integral diverges (the QFI vanishes somewhere on the range).
class DivergentMeasureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Node doubling reached the node cap without meeting the tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double previous, double last)
      : std::runtime_error(what), previous_(previous), last_(last) {}

  double previous_estimate() const noexcept { return previous_; }
  double last_estimate() const noexcept { return last_; }

 private:
  double previous_;
  double last_;
};

/// Problem size beyond what a dense or enumerative path can hold.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Linear system of the inverse Ising design is rank deficient.
class RankError : public std::runtime_error {
 public:
  RankError(const std::string& what, long rank) : std::runtime_error(what), rank_(rank) {}
  long rank() const noexcept { return rank_; }

 private:
  long rank_;
};

/// A root or transition is not bracketed by the supplied interval.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace thermoprobe

#endif  // THERMOPROBE_ERRORS_HPP
