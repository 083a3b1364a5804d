#pragma once

#include <stdexcept>

namespace authscan {

// Base class for every error this toolkit raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// api_model
class ParseError : public Error {
 public:
  using Error::Error;
};
class UnsupportedSpecError : public Error {
 public:
  using Error::Error;
};
class MissingServerError : public Error {
 public:
  using Error::Error;
};

// http_engine
class MissingRequiredParameterError : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};
class FormatError : public Error {
 public:
  using Error::Error;
};

// token_mutator
class EmptyTokenError : public Error {
 public:
  using Error::Error;
};
class NoEligiblePositionError : public Error {
 public:
  using Error::Error;
};
class ExhaustedMutationsError : public Error {
 public:
  using Error::Error;
};

// scenario_engine
class NoLoginOperationError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};

// oracles
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};
class TraceMismatchError : public Error {
 public:
  using Error::Error;
};

// mock_lab
class BindError : public Error {
 public:
  using Error::Error;
};

}  // namespace authscan
