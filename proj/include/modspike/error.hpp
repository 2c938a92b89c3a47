#pragma once

#include <stdexcept>
#include <string>

namespace modspike {

/// Input outside an operation's mathematical domain (non-SPD, non-unimodular, delta out of range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative method failed to meet its accuracy target.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Algorithm 1 could not form an estimate (e.g. the ball selected no samples).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed command line, config file or CSV input.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace modspike
