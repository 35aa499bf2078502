#pragma once

#include <stdexcept>
#include <string>

namespace ivs {

// Recoverable failure: bad input data, I/O, unsatisfiable request.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void expects(bool condition, const std::string& what) {
  if (!condition) throw ContractViolation(what);
}

}  // namespace ivs
