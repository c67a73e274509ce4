#pragma once

#include <stdexcept>
#include <string>

namespace minet {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension disagreement between operands.
struct ShapeError : Error {
  using Error::Error;
};

// Argument outside the operation's domain (empty set, bad rate, ...).
struct DomainError : Error {
  using Error::Error;
};

// Malformed input file; messages carry "path:line:" provenance.
struct FormatError : Error {
  using Error::Error;
};

// Invalid model/run configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Caller broke an API contract (unregistered param, non-deterministic loss).
struct ContractError : Error {
  using Error::Error;
};

// Operation not available for this model kind.
struct UnsupportedError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace minet
