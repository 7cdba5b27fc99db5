#pragma once

#include <stdexcept>
#include <string>

namespace citygwr {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid hyperparameters, policy or pipeline configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed caller input (wrong dimension, negative distance, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// A level-2 day observation arrived before the matching region growth.
class PipelineOrderError : public InputError {
public:
    using InputError::InputError;
};

/// A day with no accepted trips cannot be turned into a density vector.
class EmptyDayError : public InputError {
public:
    using InputError::InputError;
};

/// Snapshot or checkpoint cannot be decoded or is incompatible.
class PersistenceError : public Error {
public:
    using Error::Error;
};

/// Unreadable input or unwritable output.
class IoError : public Error {
public:
    using Error::Error;
};

/// Two Voronoi generators coincide.
class DegeneratePartitionError : public Error {
public:
    using Error::Error;
};

class ExportError : public Error {
public:
    using Error::Error;
};

}  // namespace citygwr
