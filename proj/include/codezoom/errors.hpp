#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace codezoom {

/// Raised when a value would violate a domain-type invariant.
class InvariantError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
public:
    ParseError(int line, int column, std::string message, std::vector<std::string> expected = {});

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    int line_;
    int column_;
    std::string message_;
    std::vector<std::string> expected_;
};

/// Interchange document failed validation; `path()` names the offending node,
/// e.g. `steps[2].then[0].text`.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string path, std::string message);

    const std::string& path() const noexcept { return path_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string path_;
    std::string message_;
};

class RangeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation not allowed in the current session / preview state.
class InvalidState : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace codezoom
