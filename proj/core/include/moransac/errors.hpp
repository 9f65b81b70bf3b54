#pragma once

#include <stdexcept>
#include <string>

namespace moransac {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The caller handed us something unusable: mismatched dimensions, too few
/// points, unreadable or corrupt files, invalid configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A data-dependent stage could not produce a result: no plane consensus,
/// a degenerate fit, nothing left to grasp.
class PipelineError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

class EmptyCloudError : public InputError {
 public:
  using InputError::InputError;
};

class InsufficientPointsError : public InputError {
 public:
  using InputError::InputError;
};

/// Bad magic bytes, unsupported version, or a truncated/garbled file.
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

/// A scene specification that cannot be realized (e.g. objects larger than
/// the floor they must stand on).
class SceneSpecError : public InputError {
 public:
  using InputError::InputError;
};

class DegenerateFitError : public PipelineError {
 public:
  using PipelineError::PipelineError;
};

class NoPlaneFoundError : public PipelineError {
 public:
  using PipelineError::PipelineError;
};

class NoFloorError : public PipelineError {
 public:
  using PipelineError::PipelineError;
};

class NothingToGraspError : public PipelineError {
 public:
  using PipelineError::PipelineError;
};

}  // namespace moransac
