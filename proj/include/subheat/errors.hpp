#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace subheat {

enum class ErrorKind {
    InvalidInput,
    NotSolvable,
    NotHormander,
    DegenerateInput,
    RegimeMismatch,
    NonFinite,
    TooManyRejections,
    NoConvergence,
    BoundaryMassLeak,
    ClassOverflow,
    WindowExceeded,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries the module that raised it and
/// a machine-readable kind, so the CLI can echo both.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& what)
        : std::runtime_error(std::string(module) + ": " + std::string(to_string(kind)) + ": " + what),
          kind_(kind), module_(std::move(module)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::NotSolvable: return "NotSolvable";
        case ErrorKind::NotHormander: return "NotHormander";
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::RegimeMismatch: return "RegimeMismatch";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::TooManyRejections: return "TooManyRejections";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::BoundaryMassLeak: return "BoundaryMassLeak";
        case ErrorKind::ClassOverflow: return "ClassOverflow";
        case ErrorKind::WindowExceeded: return "WindowExceeded";
    }
    return "Unknown";
}

}  // namespace subheat
