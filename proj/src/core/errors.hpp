#pragma once

#include <stdexcept>
#include <string>

namespace treebandit {

// Error categories double as the status codes of the C API (see treebandit.h).
enum class ErrorCode {
  Structural = 1,
  Parameter = 2,
  Generation = 3,
  Parse = 4,
  Protocol = 5,
  UnsupportedMode = 6,
  Invariant = 7,
  Io = 8,
  Capacity = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define TREEBANDIT_DEFINE_ERROR(Name, Code)                               \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {} \
  };

TREEBANDIT_DEFINE_ERROR(StructuralError, Structural)
TREEBANDIT_DEFINE_ERROR(ParameterError, Parameter)
TREEBANDIT_DEFINE_ERROR(GenerationError, Generation)
TREEBANDIT_DEFINE_ERROR(ParseError, Parse)
TREEBANDIT_DEFINE_ERROR(ProtocolError, Protocol)
TREEBANDIT_DEFINE_ERROR(UnsupportedModeError, UnsupportedMode)
TREEBANDIT_DEFINE_ERROR(InvariantViolation, Invariant)
TREEBANDIT_DEFINE_ERROR(IoError, Io)
TREEBANDIT_DEFINE_ERROR(CapacityError, Capacity)

#undef TREEBANDIT_DEFINE_ERROR

}  // namespace treebandit
