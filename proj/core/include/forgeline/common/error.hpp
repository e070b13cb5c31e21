#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace forgeline {

// Root of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class RoutingError : public Error {
 public:
  using Error::Error;
};

class TruncationError : public Error {
 public:
  TruncationError(const std::string& topic, std::uint64_t requested, std::uint64_t earliest)
      : Error("offset " + std::to_string(requested) + " on topic '" + topic +
              "' is older than retention; earliest available is " + std::to_string(earliest)),
        earliest_offset_(earliest) {}

  std::uint64_t earliest_offset() const noexcept { return earliest_offset_; }

 private:
  std::uint64_t earliest_offset_;
};

class TagError : public Error {
 public:
  using Error::Error;
};

class TagTypeError : public TagError {
 public:
  using TagError::TagError;
};

class UnknownTagError : public TagError {
 public:
  using TagError::TagError;
};

class TagUnavailableError : public TagError {
 public:
  using TagError::TagError;
};

class WrappingError : public Error {
 public:
  using Error::Error;
};

class UndefinedRatioError : public Error {
 public:
  using Error::Error;
};

}  // namespace forgeline
