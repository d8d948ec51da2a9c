#ifndef MTM_ERRORS_HPP
#define MTM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mtm {

// Bad user-supplied configuration (files, covariances, weight functions).
// The CLI maps this to exit code 2; everything else maps to exit code 1.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact enumeration would exceed the tractability guard.
struct size_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mtm

#endif  // MTM_ERRORS_HPP
