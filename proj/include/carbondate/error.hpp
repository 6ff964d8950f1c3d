#pragma once

#include <stdexcept>
#include <string>

namespace carbondate {

/// Base of every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedUri : public Error {
 public:
  explicit MalformedUri(const std::string& raw)
      : Error("malformed URI: '" + raw + "'") {}
};

class UnparsableDate : public Error {
 public:
  explicit UnparsableDate(const std::string& text)
      : Error("unparsable date: '" + text + "'") {}
};

class MalformedTimemap : public Error {
 public:
  using Error::Error;
};

/// Raised by transports: connection failures, timeouts, replay misses.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// A replayed request has no recorded counterpart in the cassette.
class UnmatchedInteraction : public TransportError {
 public:
  explicit UnmatchedInteraction(const std::string& key)
      : TransportError("unmatched interaction: " + key), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class DuplicateMethod : public Error {
 public:
  using Error::Error;
};

class UnknownMethod : public Error {
 public:
  using Error::Error;
};

class InvalidLagModel : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace carbondate
