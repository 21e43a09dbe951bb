#pragma once

#include <stdexcept>
#include <string>

namespace sgmm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A root bracket whose endpoints do not straddle a sign change.
class BracketError : public Error {
public:
    using Error::Error;
};

/// An iterative method hit its iteration cap.
class NoConvergence : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class SizeMismatch : public Error {
public:
    using Error::Error;
};

/// Exhaustive permutation search is limited to K <= 10.
class TooManyComponents : public Error {
public:
    using Error::Error;
};

/// pi_min <= 2 * epsilon: no constant c0 exists.
class InfeasibleEpsilon : public Error {
public:
    using Error::Error;
};

/// Class separation c does not exceed the minimum separation c0 * eta0.
class SeparationTooSmall : public Error {
public:
    using Error::Error;
};

/// The per-pair TV bound cannot be formed (rho exceeds (pi_min - 2 eps) / (1 - pi_min)).
class RefinementInapplicable : public Error {
public:
    using Error::Error;
};

class UnknownExample : public Error {
public:
    using Error::Error;
};

/// Malformed input file or value.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace sgmm
