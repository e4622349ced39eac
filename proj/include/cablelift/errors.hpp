#pragma once

#include <stdexcept>
#include <string>

namespace cablelift {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CABLELIFT_DEFINE_ERROR(Name)          \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  }

CABLELIFT_DEFINE_ERROR(DomainError);
CABLELIFT_DEFINE_ERROR(NotSkew);
CABLELIFT_DEFINE_ERROR(DegenerateGeometry);
CABLELIFT_DEFINE_ERROR(NonFiniteState);
CABLELIFT_DEFINE_ERROR(DimensionMismatch);
CABLELIFT_DEFINE_ERROR(ConfigError);
CABLELIFT_DEFINE_ERROR(QpNumericalFailure);
CABLELIFT_DEFINE_ERROR(RankDeficient);
CABLELIFT_DEFINE_ERROR(ZeroTension);
CABLELIFT_DEFINE_ERROR(DegenerateThrust);
CABLELIFT_DEFINE_ERROR(PredictionGap);
CABLELIFT_DEFINE_ERROR(InvariantViolation);
CABLELIFT_DEFINE_ERROR(EmptyLog);
CABLELIFT_DEFINE_ERROR(IoError);
CABLELIFT_DEFINE_ERROR(SolverAbort);

#undef CABLELIFT_DEFINE_ERROR

}  // namespace cablelift
