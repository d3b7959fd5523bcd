#pragma once

#include <stdexcept>

namespace dynperc {

/// A runtime invariant of a coupled construction failed. Callers map this
/// to a dedicated exit status.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dynperc
