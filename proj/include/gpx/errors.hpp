#pragma once

#include <stdexcept>
#include <string>

namespace gpx {

enum class ErrorKind {
    NonBracketed,
    NoConvergence,
    DomainError,
    UnderResolved,
    BadTail,
    GeometryViolated,
    WrongBranch,
    MultiPeak,
    ParseError,
    RangeError,
    IoError,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::NonBracketed: return "NonBracketed";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::UnderResolved: return "UnderResolved";
        case ErrorKind::BadTail: return "BadTail";
        case ErrorKind::GeometryViolated: return "GeometryViolated";
        case ErrorKind::WrongBranch: return "WrongBranch";
        case ErrorKind::MultiPeak: return "MultiPeak";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::RangeError: return "RangeError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}
    ErrorKind kind() const noexcept { return kind_; }
    /// what() without the kind prefix
    const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

}  // namespace gpx
