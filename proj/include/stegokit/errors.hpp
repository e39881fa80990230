#pragma once

#include <stdexcept>
#include <string>

namespace stegokit {

// Base class for all library errors. The CLI maps subclasses to exit codes:
// input_error -> 2, mismatch_error -> 3, cap_error -> 4.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments, malformed input files, violated preconditions.
struct input_error : error {
    explicit input_error(const std::string& msg) : error(msg) {}
};

// Structurally valid inputs that do not fit together: wrong stegotext
// length, key/channel parameter disagreement, unknown alphabet symbol.
struct mismatch_error : error {
    explicit mismatch_error(const std::string& msg) : error(msg) {}
};

// Work refused because an enumeration or resource cap would be exceeded.
struct cap_error : error {
    explicit cap_error(const std::string& msg) : error(msg) {}
};

} // namespace stegokit
