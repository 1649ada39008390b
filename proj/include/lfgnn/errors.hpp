#pragma once

#include <stdexcept>
#include <string>

namespace lfgnn {

// Base class for all library errors. Subclasses map onto the CLI exit
// codes: usage/config/malformed input -> 2, broken data -> 3, numerical
// failure -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };
struct SingularCovariance : Error { using Error::Error; };
struct UnsupportedRatio : Error { using Error::Error; };
struct BandError : Error { using Error::Error; };
struct SurrogateFailure : Error { using Error::Error; };
struct RankError : Error { using Error::Error; };
struct InvalidOrder : Error { using Error::Error; };
struct StabilityError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct CorruptFile : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };
struct StratificationError : Error { using Error::Error; };
struct DegenerateTest : Error { using Error::Error; };

} // namespace lfgnn
