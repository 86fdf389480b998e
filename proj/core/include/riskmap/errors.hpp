#pragma once

#include <stdexcept>
#include <string>

namespace riskmap {

/// Base class for all riskmap errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller violated an input contract (bad config, malformed file, ...).
/// The CLI maps these to exit code 2.
struct ValidationError : Error {
  using Error::Error;
};

struct DegenerateGeometry : ValidationError {
  using ValidationError::ValidationError;
};
struct InvalidInterval : ValidationError {
  using ValidationError::ValidationError;
};
struct InvalidTrajectory : ValidationError {
  using ValidationError::ValidationError;
};
struct MissingContext : ValidationError {
  using ValidationError::ValidationError;
};
struct EmptyInput : ValidationError {
  using ValidationError::ValidationError;
};
struct SpecMismatch : ValidationError {
  using ValidationError::ValidationError;
};
struct LengthMismatch : ValidationError {
  using ValidationError::ValidationError;
};
struct NotADistribution : ValidationError {
  using ValidationError::ValidationError;
};
struct InsufficientData : Error {
  using Error::Error;
};
struct TooFewPoints : Error {
  using Error::Error;
};
struct EmptyCluster : Error {
  using Error::Error;
};
struct DegenerateLabels : ValidationError {
  using ValidationError::ValidationError;
};
struct DimensionMismatch : ValidationError {
  using ValidationError::ValidationError;
};
struct TooSparse : Error {
  using Error::Error;
};
struct ModelMismatch : ValidationError {
  using ValidationError::ValidationError;
};
struct DriverSetMismatch : ValidationError {
  using ValidationError::ValidationError;
};
struct ConfigInvalid : ValidationError {
  using ValidationError::ValidationError;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace riskmap
