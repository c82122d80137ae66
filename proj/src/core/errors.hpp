#pragma once

#include <stdexcept>
#include <string>

namespace reliafit {

/// Error categories surfaced through the C API as status codes.
enum class Errc {
    parse = 1,        // malformed input row/field
    empty_input = 2,  // input contained no events
    domain = 3,       // argument outside mathematical domain
    precondition = 4, // operation precondition violated (e.g. too little data)
    contract = 5,     // API misuse (mismatched lengths, wrong kind, ...)
    degenerate = 6,   // degenerate problem (singular system, all-zero series)
    nonconvergence = 7,
    io = 8,
    config = 9        // bad spec/configuration file
};

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Parse failure with the 1-based line and the offending field spelled out.
class ParseError : public Error {
public:
    ParseError(std::string message, long line, std::string field)
        : Error(Errc::parse, std::move(message)), line_(line), field_(std::move(field)) {}

    long line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    long line_;
    std::string field_;
};

} // namespace reliafit
