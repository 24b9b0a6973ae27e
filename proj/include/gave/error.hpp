#pragma once

#include <stdexcept>
#include <string>

namespace gave {

enum class ErrorKind {
    ShapeMismatch,
    InvalidArgument,
    MissingWeights,
    Io,
    Format,
    Degenerate,
    Empty,
};

const char* to_string(ErrorKind kind);

/// Every recoverable failure in the library is reported as a gave::Error.
/// `kind()` lets callers (and the CLI) branch on the category without
/// parsing the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ShapeMismatch: return "shape mismatch";
        case ErrorKind::InvalidArgument: return "invalid argument";
        case ErrorKind::MissingWeights: return "missing weights";
        case ErrorKind::Io: return "io error";
        case ErrorKind::Format: return "format error";
        case ErrorKind::Degenerate: return "degenerate input";
        case ErrorKind::Empty: return "empty input";
    }
    return "error";
}

}  // namespace gave
