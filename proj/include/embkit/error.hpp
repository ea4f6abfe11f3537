#pragma once

#include <stdexcept>
#include <string>

namespace embkit {

// Base for all toolkit errors. CLI maps these to exit code 1; anything
// else escaping main is an internal error (exit 2).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidParameterError : public Error {
public:
    using Error::Error;
};

class DegenerateInputError : public Error {
public:
    using Error::Error;
};

class ContractViolationError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class NonIdentifiableError : public Error {
public:
    using Error::Error;
};

class UnsupportedOperationError : public Error {
public:
    using Error::Error;
};

class ConnectivityError : public Error {
public:
    ConnectivityError(const std::string& msg, int components)
        : Error(msg), component_count(components) {}
    int component_count;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace embkit
