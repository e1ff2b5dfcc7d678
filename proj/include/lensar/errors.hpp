#pragma once

#include <stdexcept>
#include <string>

namespace lensar {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values (lens design, channel, layout, scenario).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; the message names the offending row or field.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Too few valid RSS entries to estimate a direction.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Observation or template carries no spatial information (flat vector).
class NoSignalError : public Error {
 public:
  using Error::Error;
};

// Event trace lacks events a metric requires.
class TraceError : public Error {
 public:
  using Error::Error;
};

}  // namespace lensar
