#pragma once

#include <stdexcept>
#include <string>

namespace mailproc {

// Base of every error the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A required input column is missing or the header is malformed.
class SchemaError : public Error {
public:
    SchemaError(const std::string& msg, std::string column)
        : Error(msg), column_(std::move(column)) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

// Corpus-level violation (duplicate ids, empty corpus).
class CorpusError : public Error {
public:
    using Error::Error;
};

// One data row could not be parsed. Row numbers are 1-based data rows.
class RowError : public Error {
public:
    RowError(const std::string& msg, std::size_t row) : Error(msg), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

// Caller broke a precondition (mismatched vocabularies, bad k, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

// Invalid pipeline configuration. The CLI maps this to exit code 2.
class ConfigError : public Error {
public:
    ConfigError(const std::string& msg, std::string key) : Error(msg), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

// A phase was requested before the phase it depends on. Exit code 3.
class PhaseError : public Error {
public:
    using Error::Error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class InvalidLabel : public Error {
public:
    using Error::Error;
};

}  // namespace mailproc
