#ifndef CPI_ERROR_H_
#define CPI_ERROR_H_

#include <stdexcept>
#include <string>

namespace cpi {

// Base class for every failure raised by the library. Callers that only
// want a diagnostic can catch this; callers that branch on the failure kind
// catch the concrete subclasses declared next to the operations that throw
// them.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violates a documented type invariant (negative latency, an
// envelope with lo >= hi, a schedule whose ceiling is below its doubling
// limit, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace cpi

#endif  // CPI_ERROR_H_
