#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace appc {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error
{
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(format(what, line, column)), line_(line), column_(column)
    {
    }

    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t column() const { return column_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column)
    {
        if (line == 0)
            return what;
        return what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
    }

    std::size_t line_;
    std::size_t column_;
};

/// Well-formed input that violates a model invariant.
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// The specification cannot be met from the initial state.
class UnsatisfiableError : public Error
{
public:
    using Error::Error;
};

/// A bounded search hit its cap; carries the best value found so far.
class CapExceededError : public Error
{
public:
    CapExceededError(const std::string& what, std::size_t best) : Error(what), best_(best) {}

    [[nodiscard]] std::size_t best() const { return best_; }

private:
    std::size_t best_;
};

} // namespace appc
