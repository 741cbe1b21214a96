#pragma once

#include <stdexcept>
#include <string>

namespace spdclab {

/// Invalid user-supplied parameter or configuration value.
class invalid_parameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input is well formed but outside the regime the models support
/// (mean occupancy >= 1, oversized grids, ...).
class regime_violation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Two sampled objects live on incompatible grids.
class grid_mismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Timestamp stream not sorted ascending.
class unsorted_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed, truncated or foreign `.evt` file.
class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace spdclab
