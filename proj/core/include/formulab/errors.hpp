#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace formulab {

// Invalid argument values or violated preconditions.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Column set does not match the declared schema.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed CSV content; carries the 1-based data row number (0 for header).
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t row, const std::string& what)
        : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

// Dataset-level invariant violated (duplicate ids, out-of-range targets).
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Record id not present in the dataset.
class LookupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File cannot be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Not enough records to satisfy a selection request.
class InsufficientDataError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

// Category label seen at prediction time but not at fit time.
class UnknownCategoryError : public std::runtime_error {
public:
    UnknownCategoryError(const std::string& column, const std::string& label)
        : std::runtime_error("unknown category '" + label + "' in column '" + column + "'"),
          column_(column), label_(label) {}
    const std::string& column() const noexcept { return column_; }
    const std::string& label() const noexcept { return label_; }

private:
    std::string column_;
    std::string label_;
};

}  // namespace formulab
