#pragma once

#include <stdexcept>
#include <string>

namespace blimey {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// -- dataset ingestion ------------------------------------------------------

/// CSV header and metadata declare different column names.
class MetadataMismatchError : public Error {
 public:
  using Error::Error;
};

/// A cell in a numerical column could not be parsed as a number.
class ValueParseError : public Error {
 public:
  using Error::Error;
};

/// A categorical cell holds a value not listed in the feature's categories.
class UnknownCategoryError : public Error {
 public:
  using Error::Error;
};

/// Empty file, empty matrix or a count below the operation's minimum.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Two operands that must share a width (feature count) do not.
class WidthMismatchError : public Error {
 public:
  using Error::Error;
};

// -- black box --------------------------------------------------------------

/// Training requested on a dataset without labels.
class MissingLabelsError : public Error {
 public:
  using Error::Error;
};

/// Training requested on a dataset whose labels hold a single class.
class SingleClassError : public Error {
 public:
  using Error::Error;
};

// -- interpretable representation -------------------------------------------

/// A bin index is outside the fitted bin range of its feature.
class InvalidBinError : public Error {
 public:
  using Error::Error;
};

/// Reconstruction requested for a bin that holds no training data.
class EmptyBinError : public Error {
 public:
  using Error::Error;
};

/// A one-hot group does not contain exactly one set bit.
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// A value expected to be binary (0 or 1) is not.
class NonBinaryInputError : public Error {
 public:
  using Error::Error;
};

// -- sampling ---------------------------------------------------------------

/// A boundary-seeking sampler exhausted its rounds with a single class.
class NoBoundaryError : public Error {
 public:
  using Error::Error;
};

// -- surrogate fitting ------------------------------------------------------

/// All sample weights are zero.
class ZeroWeightError : public Error {
 public:
  using Error::Error;
};

/// The normal-equation system is numerically singular.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// The local sample carries no signal (black box locally constant).
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

// -- pipeline / CLI ----------------------------------------------------------

/// An invalid module combination or flag value. `constraint()` identifies
/// the violated compatibility rule so callers can tell rejections apart.
class ConfigError : public Error {
 public:
  ConfigError(std::string constraint, const std::string& what)
      : Error(what), constraint_(std::move(constraint)) {}
  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

}  // namespace blimey
