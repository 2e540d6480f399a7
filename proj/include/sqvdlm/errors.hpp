#pragma once

#include <stdexcept>
#include <string>

namespace sqvdlm {

// Every error raised by the library derives from Error so callers can catch
// one type at the boundary (CLI, Python) and still discriminate when needed.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text: carries the source name and 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::string source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what),
          source_(std::move(source)),
          line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

class CoverageError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Violated pre-condition between arguments (shapes, lengths, ordering).
class ContractError : public Error {
public:
    using Error::Error;
};

// Numerically singular system encountered during a recursion or solve.
class DegeneracyError : public Error {
public:
    DegeneracyError(const std::string& what, long time_index = -1)
        : Error(what), time_index_(time_index) {}

    // Time index (1-based) where the failure happened, -1 when not tied to t.
    long time_index() const noexcept { return time_index_; }

private:
    long time_index_;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

}  // namespace sqvdlm
