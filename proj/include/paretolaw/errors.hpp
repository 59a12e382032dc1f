#pragma once

#include <stdexcept>
#include <string>

namespace paretolaw {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite value encountered in a forward or backward pass.
class NumericError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch, int batch)
      : Error(what + " (epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ")"),
        epoch_(epoch),
        batch_(batch) {}

  int epoch() const noexcept { return epoch_; }
  int batch() const noexcept { return batch_; }

 private:
  int epoch_;
  int batch_;
};

class DigestMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace paretolaw
