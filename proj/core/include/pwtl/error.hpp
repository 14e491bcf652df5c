#pragma once

#include <stdexcept>
#include <string>

namespace pwtl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file (syntax, missing fields, wrong types).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input parsed but violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Time step too large for the discretisation of at least one road.
class CflError : public Error {
public:
    using Error::Error;
};

/// A computation produced a non-finite value.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace pwtl
