#pragma once

#include <stdexcept>
#include <string>

namespace sse {

/// Invalid configuration or arguments (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CLI exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// JSON text that could not be parsed; carries the byte offset of the failure.
class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t byte_offset)
        : DataError(what + " (at byte " + std::to_string(byte_offset) + ")"), offset_(byte_offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Well-formed JSON that violates the record schema.
class SchemaError : public DataError {
public:
    using DataError::DataError;
};

/// Vector/model file format violations.
class FormatError : public DataError {
public:
    using DataError::DataError;
};

/// Feature rows that cannot be joined by id.
class JoinError : public DataError {
public:
    using DataError::DataError;
};

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A learner could not be fitted (e.g. a single-class training set).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sse
