#pragma once

#include <stdexcept>
#include <string>

namespace drcov {

// Base for every error raised by the library. Callers that only want to report
// and exit can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input files (edge triples, features, splits, checkpoints).
class ParseError : public Error {
public:
    using Error::Error;
};

// Dimension or structural mismatch between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

// NaN/Inf produced or consumed by the numeric core.
class NumericError : public Error {
public:
    using Error::Error;
};

// Data-level checks: count gates, unknown relations, bad entity kinds.
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace drcov
