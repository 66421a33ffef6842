#pragma once

#include <stdexcept>
#include <string>

namespace relpos {

/// Base for every error raised by the library. `kind()` is the stable
/// machine-readable name used in reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define RELPOS_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

RELPOS_DEFINE_ERROR(DimensionError);
RELPOS_DEFINE_ERROR(DegenerateDirection);
RELPOS_DEFINE_ERROR(EmptyInput);
RELPOS_DEFINE_ERROR(InvalidNoise);
RELPOS_DEFINE_ERROR(InvalidArgument);
RELPOS_DEFINE_ERROR(InsufficientReceivers);
RELPOS_DEFINE_ERROR(GeometryDegenerate);
RELPOS_DEFINE_ERROR(Inconsistent);
RELPOS_DEFINE_ERROR(BudgetExceeded);

#undef RELPOS_DEFINE_ERROR

}  // namespace relpos
