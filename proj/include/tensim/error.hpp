#pragma once

#include <stdexcept>
#include <string>

namespace tensim {

// Thrown when an argument violates an operation's precondition (bad mode,
// shape mismatch, invalid partition, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Thrown when two operands have incompatible dimensions.
class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// Thrown when a numerical precondition fails at runtime (rank deficiency,
// ill-conditioned bases, blocks that do not separate).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown by readers on malformed input.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace tensim
