#pragma once

#include <stdexcept>
#include <string>

namespace levystop {

/// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Operation not defined for this Lévy family.
class UnsupportedFamily : public Error {
public:
    using Error::Error;
};

/// No sign change found while bracketing a root.
class BracketFailure : public Error {
public:
    using Error::Error;
};

/// Problem parameters violate a standing assumption (r > psi(1), ...).
class AssumptionViolation : public Error {
public:
    using Error::Error;
};

/// Malformed input: bad JSON, missing fields, out-of-range parameters.
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical accuracy target was not met and the caller asked for strictness.
class QualityError : public Error {
public:
    using Error::Error;
};

}  // namespace levystop
