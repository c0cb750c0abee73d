#pragma once

#include <stdexcept>
#include <string>

namespace decphase {

// Base for every library error so tool-level code can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct NotHermitian : Error { using Error::Error; };
struct DegenerateSpectrum : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct MalformedEmbedding : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

// Interference term too small to carry a phase; keeps the measured modulus.
struct UndefinedPhase : Error {
    UndefinedPhase(const std::string& msg, double mag) : Error(msg), magnitude(mag) {}
    double magnitude;
};

}  // namespace decphase
