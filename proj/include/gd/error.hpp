#pragma once

#include <stdexcept>
#include <string>

namespace gd {

// Base class for all library errors. Two families matter to the CLI:
// InvalidInput maps to exit code 1, FileError to exit code 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
    using Error::Error;
};

struct FileError : Error {
    using Error::Error;
};

// numeric / model errors
struct DimMismatch : InvalidInput { using InvalidInput::InvalidInput; };
struct ZeroVector : InvalidInput { using InvalidInput::InvalidInput; };
struct BadTemperature : InvalidInput { using InvalidInput::InvalidInput; };
struct NotADistribution : InvalidInput { using InvalidInput::InvalidInput; };
struct ShapeMismatch : InvalidInput { using InvalidInput::InvalidInput; };
struct UnsupportedPrimitive : InvalidInput { using InvalidInput::InvalidInput; };

// data / store / graph errors
struct BadSpec : InvalidInput { using InvalidInput::InvalidInput; };
struct ConfigMismatch : InvalidInput { using InvalidInput::InvalidInput; };
struct EmptyStore : InvalidInput { using InvalidInput::InvalidInput; };
struct EmptySupport : InvalidInput { using InvalidInput::InvalidInput; };
struct TooFewSamples : InvalidInput { using InvalidInput::InvalidInput; };
struct BadNode : InvalidInput { using InvalidInput::InvalidInput; };
struct DegenerateSplit : InvalidInput { using InvalidInput::InvalidInput; };

// config parsing
struct ParseError : InvalidInput { using InvalidInput::InvalidInput; };
struct ValidationError : InvalidInput { using InvalidInput::InvalidInput; };

// file I/O
struct IoError : FileError { using FileError::FileError; };
struct BadMagic : FileError { using FileError::FileError; };
struct TruncatedFile : FileError { using FileError::FileError; };
struct CorruptEdge : FileError { using FileError::FileError; };

}  // namespace gd
