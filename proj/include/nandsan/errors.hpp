#pragma once

#include <stdexcept>
#include <string>

namespace nandsan {

// Domain error hierarchy. The CLI maps any of these to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DownwardProgram : Error { using Error::Error; };
struct BadLength : Error { using Error::Error; };
struct OutOfBounds : Error { using Error::Error; };
struct NonAscii : Error { using Error::Error; };
struct Unmapped : Error { using Error::Error; };
struct DeviceFull : Error { using Error::Error; };
struct InsufficientFree : Error { using Error::Error; };
struct UnknownScheme : Error { using Error::Error; };
struct Unreachable : Error { using Error::Error; };
struct Mismatch : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct DeviceLocked : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace nandsan
