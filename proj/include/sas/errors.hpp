#pragma once

#include <stdexcept>
#include <string>

namespace sas {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SAS_DEFINE_ERROR(Name)          \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  };

SAS_DEFINE_ERROR(InvalidDirection)
SAS_DEFINE_ERROR(DispersionViolation)
SAS_DEFINE_ERROR(SamplingError)
SAS_DEFINE_ERROR(HelicityPurityError)
SAS_DEFINE_ERROR(NormalizationError)
SAS_DEFINE_ERROR(DomainError)
SAS_DEFINE_ERROR(UnderResolvedBath)
SAS_DEFINE_ERROR(RecurrenceError)
SAS_DEFINE_ERROR(ResourceError)
SAS_DEFINE_ERROR(WindowError)
SAS_DEFINE_ERROR(FarFieldViolation)
SAS_DEFINE_ERROR(GrowthError)
SAS_DEFINE_ERROR(SingularConstant)
SAS_DEFINE_ERROR(StationarityError)
SAS_DEFINE_ERROR(VacuumApproximationError)
SAS_DEFINE_ERROR(GeometryError)
SAS_DEFINE_ERROR(ResolutionError)
SAS_DEFINE_ERROR(UnderflowError)
SAS_DEFINE_ERROR(DegenerateDistribution)
SAS_DEFINE_ERROR(ConfigError)
SAS_DEFINE_ERROR(IoError)

#undef SAS_DEFINE_ERROR

}  // namespace sas
