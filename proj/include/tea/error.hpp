#pragma once

#include <stdexcept>

namespace tea {

/// Malformed input data (file headers, annotation lines, config files).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Failure to read or write a file.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tea
