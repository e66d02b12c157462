#pragma once

#include <stdexcept>
#include <string>

namespace rtm {

// Base for every exception thrown by the library. Each module derives its own
// type carrying a module-specific error code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rtm
