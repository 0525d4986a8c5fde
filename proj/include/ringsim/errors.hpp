#pragma once

#include <stdexcept>
#include <string>

namespace ringsim {

// Bad user input: malformed scenario, CSV, or argument values.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// File system failure (unwritable path, missing file).
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ringsim
