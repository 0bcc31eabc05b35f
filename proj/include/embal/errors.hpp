#pragma once

#include <stdexcept>
#include <string>

namespace embal {

/// Invalid parameters or configuration. CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed, inconsistent or unreadable data. CLI exit code 3.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Divergence or non-finite values during training. CLI exit code 4.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace embal
