#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pmc {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing, unreadable or garbled input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Frames (or bags) whose dimensions disagree with their siblings.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Out-of-range algorithm parameter (tau, gamma, c, grid sizes...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Matrix shape disagreement between a bag and a model.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Operation requires at least one principal component.
class DegenerateModel : public Error {
 public:
  using Error::Error;
};

// Caller misuse: empty vocabulary, empty sequences, bad CLI combination.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Scoring could not be carried out (e.g. missing prediction).
class ScoringError : public Error {
 public:
  using Error::Error;
};

// Batch manifest violating one or more invariants. All violations are kept.
class ManifestInvalid : public Error {
 public:
  explicit ManifestInvalid(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

}  // namespace pmc
