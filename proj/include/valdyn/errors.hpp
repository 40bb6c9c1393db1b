/**
 * @file errors.hpp
 * Exception types shared by all modules. The CLI maps them to exit codes.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace valdyn {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed textual input; carries the byte offset of the failure.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t pos)
        : Error(msg + " at position " + std::to_string(pos)), msg_(msg), pos_(pos) {}
    std::size_t position() const noexcept { return pos_; }
    /// The message without the position suffix.
    const std::string& message() const noexcept { return msg_; }

private:
    std::string msg_;
    std::size_t pos_;
};

class FieldMismatchError : public Error {
public:
    using Error::Error;
};

class ArithmeticError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Term budgets, truncation ceilings, iteration caps.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// A checked mathematical inequality or identity failed.
class FalsificationError : public Error {
public:
    using Error::Error;
};

class ContractedError : public Error {
public:
    using Error::Error;
};

class SkpAxiomError : public Error {
public:
    SkpAxiomError(const std::string& msg, int stage)
        : Error(msg + " (stage " + std::to_string(stage) + ")"), stage_(stage) {}
    int stage() const noexcept { return stage_; }

private:
    int stage_;
};

/// Internal invariant broken; indicates a bug rather than bad input.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace valdyn
