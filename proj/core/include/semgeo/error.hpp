#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semgeo {

// Base for every failure raised by the library. Callers that only need to
// distinguish "bad input data / numerics" from programming errors catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class EmptyResultError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

// A metric is mathematically undefined for the given input (one cluster,
// zero-variance ranks, coincident points...).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

}  // namespace semgeo
