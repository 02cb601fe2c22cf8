#pragma once

#include <stdexcept>
#include <string>

namespace eshock {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input / parsing
struct SchemaError : Error { using Error::Error; };   // missing or misnamed column
struct ParseError : Error { using Error::Error; };    // malformed field, carries file:line
struct ValueError : Error { using Error::Error; };    // value outside its documented domain

// Timeline
struct MissingData : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct OverlapError : Error { using Error::Error; };  // election cycles intersect

// Market data
struct DegenerateQuote : Error { using Error::Error; };
struct UnknownOutcome : Error { using Error::Error; };

// Regression
struct RankDeficient : Error { using Error::Error; };
struct SingularBread : Error { using Error::Error; };

// Estimation samples
struct InsufficientHistory : Error { using Error::Error; };
struct DegenerateShock : Error { using Error::Error; };
struct InsufficientSample : Error { using Error::Error; };

// Configuration
struct InvalidConfig : Error { using Error::Error; };

}  // namespace eshock
