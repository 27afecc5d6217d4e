#pragma once

#include <stdexcept>
#include <string>

namespace rmf {

// Thrown when an exact-enumeration budget would be exceeded; callers are
// expected to fall back to a cheaper method or shrink the request.
struct BudgetExceeded : std::runtime_error {
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an internal cross-check fails (e.g. a transform that must be
// integral is not). Indicates a bug, never bad user input.
struct InternalFault : std::logic_error {
    explicit InternalFault(const std::string& what) : std::logic_error(what) {}
};

}  // namespace rmf
