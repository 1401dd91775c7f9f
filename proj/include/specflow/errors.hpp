#pragma once

#include <stdexcept>
#include <string>

namespace specflow {

// Validation errors map to CLI exit code 2, numerical ones to 3.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what, bool numerical)
      : std::runtime_error(what), kind_(std::move(kind)), numerical_(numerical) {}
  const std::string& kind() const { return kind_; }
  bool numerical() const { return numerical_; }

 private:
  std::string kind_;
  bool numerical_;
};

#define SPECFLOW_ERROR(Name, numerical)                                  \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(#Name, what, numerical) {} \
  };

SPECFLOW_ERROR(ValidationError, false)
SPECFLOW_ERROR(StripViolation, false)
SPECFLOW_ERROR(QuadratureTail, false)
SPECFLOW_ERROR(GridTooCoarse, false)
SPECFLOW_ERROR(TailUnresolved, false)
SPECFLOW_ERROR(EndpointNotHyperbolic, false)
SPECFLOW_ERROR(NotHyperbolic, false)
SPECFLOW_ERROR(NonrealSpectrum, false)
SPECFLOW_ERROR(RepeatedSpeeds, false)
SPECFLOW_ERROR(SingularMatrix, false)
SPECFLOW_ERROR(DegeneracyViolated, false)
SPECFLOW_ERROR(RankMismatch, false)
SPECFLOW_ERROR(CompatibilityViolated, false)
SPECFLOW_ERROR(GenericityViolated, false)
SPECFLOW_ERROR(Inconclusive, true)
SPECFLOW_ERROR(ContourThroughRoot, true)
SPECFLOW_ERROR(NotARoot, true)
SPECFLOW_ERROR(LostTrack, true)
SPECFLOW_ERROR(CrossingsUnresolved, true)
SPECFLOW_ERROR(NewtonDiverged, true)
SPECFLOW_ERROR(IndexMismatch, true)
SPECFLOW_ERROR(NoClearGap, true)

#undef SPECFLOW_ERROR

}  // namespace specflow
