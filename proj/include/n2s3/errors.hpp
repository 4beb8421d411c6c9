#pragma once

#include <stdexcept>
#include <string>

namespace n2s3 {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// All points of a cloud coincide; no bounding sphere can be defined.
class DegenerateCloud : public Error {
public:
  using Error::Error;
};

/// Neighbor count k outside [1, point count].
class InvalidK : public Error {
public:
  using Error::Error;
};

/// Epoch index outside [0, total_epochs).
class InvalidEpoch : public Error {
public:
  using Error::Error;
};

/// Input shape does not match the network architecture.
class ArchMismatch : public Error {
public:
  using Error::Error;
};

/// A gradient contained NaN or Inf.
class NonFiniteGradient : public Error {
public:
  using Error::Error;
};

/// Training loss exceeded the divergence guard.
class TrainingDiverged : public Error {
public:
  using Error::Error;
};

/// Two sequences that must align have different lengths.
class LengthMismatch : public Error {
public:
  using Error::Error;
};

/// Parameter file has a wrong magic tag or unsupported version.
class VersionMismatch : public Error {
public:
  using Error::Error;
};

/// Parameter file CRC does not match its payload.
class ChecksumMismatch : public Error {
public:
  using Error::Error;
};

/// File content that cannot be parsed; carries a 1-based line number
/// when the format is line oriented (0 when it is not).
class ParseError : public Error {
public:
  ParseError(const std::string& msg, long line = 0)
      : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

/// File format variant the reader does not support (e.g. big-endian PLY).
class UnsupportedFormat : public Error {
public:
  using Error::Error;
};

/// Generic I/O failure (open, read, write).
class IoError : public Error {
public:
  using Error::Error;
};

/// Bad configuration document (unknown key, wrong type, missing field).
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace n2s3
