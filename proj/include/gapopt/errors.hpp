#pragma once

#include <stdexcept>
#include <string>

namespace gapopt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFinite : Error {
  using Error::Error;
};
struct Unsupported : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct UnknownFamily : Error {
  using Error::Error;
};
struct EmptyProbeSet : Error {
  using Error::Error;
};
struct UnknownSetting : Error {
  using Error::Error;
};
struct MissingHistory : Error {
  using Error::Error;
};
struct MissingConstant : Error {
  using Error::Error;
};
struct NotSmooth : Error {
  using Error::Error;
};
struct NotStronglyConvex : Error {
  using Error::Error;
};
struct NoLMO : Error {
  using Error::Error;
};
struct UnboundedSet : Error {
  using Error::Error;
};
struct IncompatibleConfiguration : Error {
  using Error::Error;
};
struct CertificationError : Error {
  using Error::Error;
};
struct StepRejected : Error {
  using Error::Error;
};
struct OffGrid : Error {
  using Error::Error;
};
struct DegenerateTrace : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// Raised by a tracked run on the first gap-invariant failure; carries the
// step index and which invariant broke.
struct InvariantViolation : Error {
  int step;
  std::string which;
  InvariantViolation(int k, std::string what_broke, const std::string& detail)
      : Error("invariant violation at k=" + std::to_string(k) + " [" + what_broke + "]: " + detail),
        step(k),
        which(std::move(what_broke)) {}
};

}  // namespace gapopt
