#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace handover {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters (filter cutoffs, TF grids, LSTM shapes, CV schemes...).
class SpecError : public Error {
public:
  using Error::Error;
};

/// Shape or dimension mismatch between inputs.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Requested time range is not covered by a stream.
class CoverageError : public Error {
public:
  CoverageError(const std::string& what, double available_start, double available_end)
      : Error(what), available_start_(available_start), available_end_(available_end) {}
  double available_start() const { return available_start_; }
  double available_end() const { return available_end_; }

private:
  double available_start_;
  double available_end_;
};

/// A trial does not carry the modality a feature builder needs.
class ModalityAbsentError : public Error {
public:
  using Error::Error;
};

/// Malformed input files: manifests, CSV records, config, cache and model files.
class DataError : public Error {
public:
  DataError(const std::string& file, std::size_t line, const std::string& message)
      : Error(file + ":" + std::to_string(line) + ": " + message), file_(file), line_(line) {}
  explicit DataError(const std::string& message) : Error(message), line_(0) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

private:
  std::string file_;
  std::size_t line_;
};

/// Estimation problems that have no answer for the given data
/// (single-class labels, zero variance, singular covariance, divergence).
class NumericError : public Error {
public:
  using Error::Error;
};

}  // namespace handover
