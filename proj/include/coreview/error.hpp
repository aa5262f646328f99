#pragma once

#include <stdexcept>
#include <string>

namespace coreview {

// Base for every error raised by the library. Callers that only need to
// report a failure can catch this; the subclasses exist for tests and for
// the pipeline driver, which maps them to stages.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InferenceError : public Error {
 public:
  using Error::Error;
};

class ComponentTooLargeError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class LengthMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace coreview
