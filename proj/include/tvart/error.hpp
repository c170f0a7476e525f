#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tvart {

enum class ErrorKind {
    SeriesTooShort,
    NonFinite,
    ZeroVariance,
    IndexOutOfRange,
    TooLarge,
    NonPositiveEta,
    DimensionMismatch,
    DegenerateData,
    DegenerateWindow,
    DegenerateProjection,
    CholeskyFailure,
    SingularSystem,
    ShapeMismatch,
    InvalidArgument,
    Parse,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (and the
/// CLI) can branch on it without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::NonPositiveEta: return "NonPositiveEta";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::DegenerateWindow: return "DegenerateWindow";
    case ErrorKind::DegenerateProjection: return "DegenerateProjection";
    case ErrorKind::CholeskyFailure: return "CholeskyFailure";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

} // namespace tvart
