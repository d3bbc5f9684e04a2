#pragma once

#include <stdexcept>
#include <string>

namespace causalkit {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad file/stream structure (wrong header, wrong column count).
class FormatError : public Error {
public:
    using Error::Error;
};

// A cell failed to parse; carries the 1-based row number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, long row) : Error(what + " (row " + std::to_string(row) + ")"), row_(row) {}
    long row() const { return row_; }

private:
    long row_;
};

class DuplicateError : public Error {
public:
    using Error::Error;
};

// Data cannot support the requested computation (empty panel, constant
// column, identical samples).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

// Caller violated a documented precondition.
class ContractError : public Error {
public:
    using Error::Error;
};

// Numerical failure (factorization breakdown); message carries a
// remediation hint.
class NumericError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

class InquiryError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace causalkit
