#pragma once

#include <stdexcept>
#include <string>

namespace fraclab {

/// Input outside the mathematical domain of an operation (e.g. nu <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Index or size outside the valid range of a table or buffer.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Malformed or inconsistent data: bad CSV rows, quota exceeding supply,
/// shape mismatches between a checkpoint and its inputs.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value appeared where finite arithmetic is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checkpoint with unknown magic or format version.
class VersionError : public DataError {
 public:
  using DataError::DataError;
};

/// Checkpoint whose checksum or length does not match its contents.
class CorruptionError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace fraclab
