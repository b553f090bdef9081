#pragma once

#include <stdexcept>
#include <string>

namespace ghgrl {

// Bad or inconsistent input data: malformed files, shape mismatches,
// non-finite numerics.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A remote or mock backend could not produce a usable answer.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ghgrl
