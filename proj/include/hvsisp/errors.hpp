#pragma once

#include <stdexcept>
#include <string>

namespace hvsisp {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HVSISP_DEFINE_ERROR(Name)       \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

HVSISP_DEFINE_ERROR(ParseError);             // malformed file or header
HVSISP_DEFINE_ERROR(RangeError);             // value outside its documented range
HVSISP_DEFINE_ERROR(OrderError);             // unsorted event timestamps
HVSISP_DEFINE_ERROR(ShapeError);             // mismatched geometries
HVSISP_DEFINE_ERROR(EmptyInputError);        // empty input list
HVSISP_DEFINE_ERROR(AnnotationError);        // bad ColorChecker annotation
HVSISP_DEFINE_ERROR(IlluminantError);        // unusable gray patch for white balance
HVSISP_DEFINE_ERROR(FitError);               // non-finite optimization objective
HVSISP_DEFINE_ERROR(ConfigError);            // invalid configuration
HVSISP_DEFINE_ERROR(PreconditionError);      // operation called out of order
HVSISP_DEFINE_ERROR(InsufficientDataError);  // not enough data for the analysis
HVSISP_DEFINE_ERROR(InvariantError);         // domain type invariant violated
HVSISP_DEFINE_ERROR(IoError);                // filesystem failure

#undef HVSISP_DEFINE_ERROR

}  // namespace hvsisp
