#ifndef HDRVQA_ERROR_H_
#define HDRVQA_ERROR_H_

#include <stdexcept>
#include <string>

namespace hdrvqa {

// Runtime failure in a computation or in I/O. Maps to CLI exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data carries no usable statistics (constant samples, one-sided
// products, empty groups).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Bad arguments or configuration. Maps to CLI exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Feature layout of a model and a feature file disagree. Exit code 2.
class LayoutMismatchError : public UsageError {
 public:
  using UsageError::UsageError;
};

}  // namespace hdrvqa

#endif  // HDRVQA_ERROR_H_
