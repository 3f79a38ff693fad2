#pragma once

#include <stdexcept>
#include <string>

namespace equiset {

// Shapes, degrees or lengths that do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Closure would exceed the element cap; the orbit route must be used instead.
class GroupTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A list of permutations that fails a group identity (e.g. non-integral
// trace average).
class NotAGroup : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration, groupspec or file.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace equiset
