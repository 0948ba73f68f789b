#pragma once

// Exception hierarchy shared by every sqlcal module.
//
// DataError subclasses describe bad input (malformed SQL, JSON, schema or
// label problems) and map to exit code 2 in the CLI. UsageError maps to 1.
// InvariantViolation means the toolkit itself is wrong and maps to 3.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sqlcal {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised for SQL outside the supported grammar subset or malformed input.
class ParseError : public DataError {
public:
    ParseError(std::size_t offset, std::string expected, std::string found)
        : DataError("parse error at offset " + std::to_string(offset) + ": expected " + expected +
                    ", found " + found),
          offset_(offset),
          expected_(std::move(expected)),
          found_(std::move(found)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& expected() const noexcept { return expected_; }
    const std::string& found() const noexcept { return found_; }

private:
    std::size_t offset_;
    std::string expected_;
    std::string found_;
};

class EmptyPool : public DataError {
public:
    using DataError::DataError;
};

class SchemaMismatch : public DataError {
public:
    using DataError::DataError;
};

class SingleClass : public DataError {
public:
    using DataError::DataError;
};

class NonFinite : public DataError {
public:
    using DataError::DataError;
};

class LengthMismatch : public DataError {
public:
    using DataError::DataError;
};

class EmptyInput : public DataError {
public:
    using DataError::DataError;
};

class NoUsableCandidate : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class JsonError : public DataError {
public:
    JsonError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SchemaError : public DataError {
public:
    SchemaError(std::size_t line, std::string field, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line), field_(std::move(field)) {}
    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

class IdMismatch : public DataError {
public:
    using DataError::DataError;
};

}  // namespace sqlcal
