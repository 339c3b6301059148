#pragma once

#include <stdexcept>
#include <string>

namespace s2r {

// Base of every error raised by the library. `kind()` is the stable,
// machine-readable name written into CLI error records.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define S2R_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

S2R_DEFINE_ERROR(ConfigError)
S2R_DEFINE_ERROR(ProtocolError)
S2R_DEFINE_ERROR(ShapeError)
S2R_DEFINE_ERROR(NumericalError)
S2R_DEFINE_ERROR(ScheduleError)
S2R_DEFINE_ERROR(CheckpointError)
S2R_DEFINE_ERROR(ProtocolMismatch)

#undef S2R_DEFINE_ERROR

}  // namespace s2r
