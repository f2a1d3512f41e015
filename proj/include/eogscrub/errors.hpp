#pragma once

#include <stdexcept>
#include <string>

namespace eogscrub {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// signal-core / metrics
struct LengthMismatch : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct TooFewSamples : Error { using Error::Error; };

// synthgen
struct BadBand : Error { using Error::Error; };

// codec
struct BadCutoff : Error { using Error::Error; };
struct SignalTooShort : Error { using Error::Error; };
struct TooShort : Error { using Error::Error; };
struct DegenerateParams : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };

// unet
struct ShapeMismatch : Error { using Error::Error; };
struct OddDims : Error { using Error::Error; };
struct SpatialMismatch : Error { using Error::Error; };
struct BadRate : Error { using Error::Error; };
struct StaleCache : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct VersionMismatch : Error { using Error::Error; };

// trainer / report
struct EmptySet : Error { using Error::Error; };
struct SchemeMismatch : Error { using Error::Error; };

// configuration (bad field values, unknown keys)
struct InvalidConfig : Error { using Error::Error; };

}  // namespace eogscrub
