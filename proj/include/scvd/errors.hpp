#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace scvd {

/// Base of every error raised by the toolchain. The CLI maps subclasses onto
/// exit codes, so new errors should derive from the closest existing kind.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LexError : public Error {
public:
    LexError(std::string message, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class ParseError : public Error {
public:
    ParseError(std::string path, std::size_t line, std::size_t column, std::vector<std::string> expected,
               std::string found);

    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::string path_;
    std::size_t line_;
    std::size_t column_;
    std::vector<std::string> expected_;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class NoSourcesFound : public Error {
public:
    using Error::Error;
};

class LinearizationError : public Error {
public:
    LinearizationError(std::string contract, const std::string& detail)
        : Error("cannot linearize inheritance of " + contract + ": " + detail), contract_(std::move(contract)) {}

    const std::string& contract() const noexcept { return contract_; }

private:
    std::string contract_;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class AmbiguousTarget : public Error {
public:
    AmbiguousTarget(const std::string& what, std::vector<std::string> signatures);

    const std::vector<std::string>& signatures() const noexcept { return signatures_; }

private:
    std::vector<std::string> signatures_;
};

/// Carries every violation found while validating an example store, so a
/// user fixing the store sees the whole list at once.
class StoreInvalid : public Error {
public:
    explicit StoreInvalid(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

class TemplateMissing : public Error {
public:
    using Error::Error;
};

class BudgetImpossible : public Error {
public:
    using Error::Error;
};

class ZeroShotRefused : public Error {
public:
    using Error::Error;
};

class BackendUnavailable : public Error {
public:
    using Error::Error;
};

class AuthError : public Error {
public:
    using Error::Error;
};

class UnsupportedCategory : public Error {
public:
    using Error::Error;
};

class UnparseableResponse : public Error {
public:
    using Error::Error;
};

class ManifestInvalid : public Error {
public:
    explicit ManifestInvalid(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

class NoPositives : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace scvd
