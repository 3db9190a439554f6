#pragma once

#include <stdexcept>
#include <string>

namespace wildannot {

// Base of every error raised by the library. Subclasses name the failure
// mode so callers (the CLI in particular) can map them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define WILDANNOT_DEFINE_ERROR(Name)        \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  };

WILDANNOT_DEFINE_ERROR(InvalidArgument)
WILDANNOT_DEFINE_ERROR(OutOfRange)
WILDANNOT_DEFINE_ERROR(DegenerateBracket)
WILDANNOT_DEFINE_ERROR(MissingTimestamps)
WILDANNOT_DEFINE_ERROR(InvalidGamma)
WILDANNOT_DEFINE_ERROR(LengthMismatch)
WILDANNOT_DEFINE_ERROR(RangeError)
WILDANNOT_DEFINE_ERROR(DimensionMismatch)
WILDANNOT_DEFINE_ERROR(EmptyDatabase)
WILDANNOT_DEFINE_ERROR(ShapeMismatch)
WILDANNOT_DEFINE_ERROR(NoValidPixels)
WILDANNOT_DEFINE_ERROR(EmptyBatch)
WILDANNOT_DEFINE_ERROR(MissingSequence)
WILDANNOT_DEFINE_ERROR(ParseError)
WILDANNOT_DEFINE_ERROR(IoError)

#undef WILDANNOT_DEFINE_ERROR

}  // namespace wildannot
