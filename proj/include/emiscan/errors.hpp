#pragma once

#include <stdexcept>
#include <string>

namespace emiscan {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PointOnConductor : Error {
  using Error::Error;
};
struct NonConductive : Error {
  using Error::Error;
};
struct DegenerateOutline : Error {
  using Error::Error;
};
struct TooCloseToSource : Error {
  using Error::Error;
};
struct VoxelOutsideCell : Error {
  using Error::Error;
};
struct NyquistViolation : Error {
  using Error::Error;
};
struct LengthMismatch : Error {
  using Error::Error;
};
struct DegenerateSweep : Error {
  using Error::Error;
};
struct UndefinedPhase : Error {
  using Error::Error;
};
struct UnphysicalOrder : Error {
  using Error::Error;
};
struct FrequencyOutOfRange : Error {
  using Error::Error;
};
struct OutsideCell : Error {
  using Error::Error;
};
struct GridExceedsSpan : Error {
  using Error::Error;
};
struct GridMismatch : Error {
  using Error::Error;
};
struct ScenarioError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};

} // namespace emiscan
