#pragma once

#include <stdexcept>
#include <string>

namespace socsim {

// Error idiom: contract violations (bad arguments, dimension mismatches)
// throw std::invalid_argument; sequencing misuse (e.g. backward before
// forward) throws std::logic_error.

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_usage(bool cond, const std::string& msg) {
  if (!cond) throw std::logic_error(msg);
}

}  // namespace socsim
