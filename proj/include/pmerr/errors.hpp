#pragma once

#include <stdexcept>
#include <string>

namespace pmerr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A price vector was required to lie in the relative interior of the simplex.
class NotInterior : public Error {
public:
    using Error::Error;
};

class MaxIterations : public Error {
public:
    using Error::Error;
};

class BracketFailure : public Error {
public:
    using Error::Error;
};

/// A PSD matrix had no eigenvalue above the rank threshold.
class ZeroMatrix : public Error {
public:
    using Error::Error;
};

class DegenerateUniform : public Error {
public:
    using Error::Error;
};

class NonPositiveGap : public Error {
public:
    using Error::Error;
};

class PreconditionViolation : public Error {
public:
    using Error::Error;
};

/// A conservation law or monotonicity property of a simulated market broke.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace pmerr
