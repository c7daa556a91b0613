#pragma once

#include <stdexcept>
#include <string>

namespace lyopt {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or out-of-domain input (negative time, dimension mismatch, non-finite data).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// A model parameter set violates its invariants.
class InvalidParameterError : public Error {
public:
    using Error::Error;
};

/// Linear solve hit a (numerically) singular matrix.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// A variance came out negative beyond round-off tolerance; signals an upstream bug.
class NegativeVarianceError : public Error {
public:
    using Error::Error;
};

/// Root finding has no solution in the admissible range (e.g. price outside no-arbitrage bounds).
class NoSolutionError : public Error {
public:
    using Error::Error;
};

/// Too few observations to identify the requested parameters.
class UnderdeterminedError : public Error {
public:
    using Error::Error;
};

/// A file does not follow the documented format.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A chain file parsed without a single valid quote.
class EmptyChainError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Filesystem-level failure (missing file, unwritable path).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace lyopt
