#pragma once

#include <stdexcept>
#include <string>

namespace fpp {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define FPP_ERROR_TYPE(Name)                            \
  struct Name : Error {                                 \
    explicit Name(const std::string& msg)               \
        : Error(std::string(#Name) + ": " + msg) {}     \
  }

FPP_ERROR_TYPE(BadWindow);
FPP_ERROR_TYPE(BadIntensity);
FPP_ERROR_TYPE(DuplicatePoint);
FPP_ERROR_TYPE(BadIndex);
FPP_ERROR_TYPE(EmptyPath);
FPP_ERROR_TYPE(BadExponent);
FPP_ERROR_TYPE(BadTarget);
FPP_ERROR_TYPE(InfiniteEnergy);
FPP_ERROR_TYPE(TooManyCandidates);
FPP_ERROR_TYPE(TooLarge);
FPP_ERROR_TYPE(BadBoxSize);
FPP_ERROR_TYPE(BadSpec);
FPP_ERROR_TYPE(MissingSeed);
FPP_ERROR_TYPE(IoError);

#undef FPP_ERROR_TYPE

}  // namespace fpp
