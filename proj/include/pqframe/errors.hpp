#pragma once

#include <stdexcept>
#include <string>

namespace pqframe {

/// Shapes do not line up: wrong coordinate count, mismatched groups, a
/// function missing values on a support.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A mathematical domain violation (exponent outside (1, inf), empty support
/// where a nonempty one is required, absolute continuity failure).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A theorem or construction precondition that the caller's inputs do not meet.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace pqframe
