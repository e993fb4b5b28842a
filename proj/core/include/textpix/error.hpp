#pragma once

#include <stdexcept>
#include <string>

namespace textpix {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents that do not line up for an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An argument outside its documented domain (out-of-range id, empty input, bad config).
class ValueError : public Error {
 public:
  using Error::Error;
};

// Malformed, truncated or inconsistent file / serialized data.
class FormatError : public Error {
 public:
  using Error::Error;
};

// NaN / Inf where finite values are required.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace textpix
