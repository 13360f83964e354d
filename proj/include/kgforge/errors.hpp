#pragma once

#include <stdexcept>
#include <string>

namespace kgforge {

// Root of every error the core throws. The C API maps each subclass onto a
// kgf_status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input file: wrong field count, duplicate id, bad JSON.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A triple names an entity or relation the graph does not know.
class DanglingReferenceError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class LlmError : public Error {
 public:
  using Error::Error;
};

class ReplayMissError : public LlmError {
 public:
  explicit ReplayMissError(std::string hash)
      : LlmError("replay miss: no fixture record for prompt hash " + hash),
        hash_(std::move(hash)) {}
  const std::string& hash() const noexcept { return hash_; }

 private:
  std::string hash_;
};

class FingerprintMismatch : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgforge
