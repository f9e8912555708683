#pragma once

#include <stdexcept>
#include <string>

namespace lshir {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input file (dataset, metric table, snapshot).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Snapshot does not belong to the dataset it is being loaded against.
class FingerprintMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace lshir
