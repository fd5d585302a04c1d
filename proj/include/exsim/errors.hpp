#pragma once

#include <stdexcept>
#include <string>

namespace exsim {

// Input/schema problems: bad files, malformed rows, dimension mismatches.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failures: singular designs, optimizer breakdown, domain violations.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace exsim
