#pragma once

#include <stdexcept>

namespace quadcatch {

// Base class of every recoverable error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violates an operation precondition (non-finite, non-positive, ...).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// The requested point lies behind the camera.
class OutOfViewError : public Error {
 public:
  using Error::Error;
};

// Query time precedes the release of the throw.
class BeforeReleaseError : public Error {
 public:
  using Error::Error;
};

// Fewer observations than the regression requires.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Normal equations are singular (e.g. repeated timestamps).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

// The fitted line never reaches the requested coordinate.
class NoCrossingError : public Error {
 public:
  using Error::Error;
};

// A catching position could not be produced for the current fit.
class PlanInfeasibleError : public Error {
 public:
  using Error::Error;
};

// Mixture fitting cannot proceed (e.g. all demonstration points identical).
class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

// Simulation state exceeded sanity bounds.
class DivergedEpisodeError : public Error {
 public:
  using Error::Error;
};

// Reference trajectory samples are malformed (non-uniform spacing, ...).
class InvalidReferenceError : public Error {
 public:
  using Error::Error;
};

// Configuration file is unreadable, unparsable or fails validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace quadcatch
