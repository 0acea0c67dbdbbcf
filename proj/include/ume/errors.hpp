#pragma once

#include <stdexcept>
#include <string>

namespace ume {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A coordinate beyond what a vector (or a decision procedure) can certify.
class HorizonExceeded : public Error {
 public:
  using Error::Error;
};

class TruthNotInFamily : public Error {
 public:
  using Error::Error;
};

/// The family admits no countable epsilon-cover.
class NotSeparable : public Error {
 public:
  using Error::Error;
};

/// Malformed family/estimator/experiment/registry description.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An estimator could not produce an estimate from the data it was given.
class EstimatorError : public Error {
 public:
  using Error::Error;
};

class NoCandidateAccepted : public EstimatorError {
 public:
  using EstimatorError::EstimatorError;
};

class EmptyAtFirstRound : public EstimatorError {
 public:
  using EstimatorError::EstimatorError;
};

class InconsistentRows : public EstimatorError {
 public:
  using EstimatorError::EstimatorError;
};

class NoBranchAccepted : public EstimatorError {
 public:
  using EstimatorError::EstimatorError;
};

class NoSurvivorAtFirstRound : public EstimatorError {
 public:
  using EstimatorError::EstimatorError;
};

}  // namespace ume
