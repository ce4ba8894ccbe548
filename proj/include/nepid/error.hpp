#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nepid {

enum class Errc {
    InvalidInput,
    ShapeMismatch,
    SingularMatrix,
    InvalidSpec,
    NotNearlyPeriodic,
    InsufficientSample,
    DegenerateCompression,
    NotNearUnitary,
    NumericalBlowup,
    DivisionByZero,
    GenerationFailed,
    ParseError,
    IoError,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above.
/// `step` is set for errors tied to a time step (blowup, zero truth column).
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what, std::optional<std::size_t> step = std::nullopt)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), step_(step) {}

    Errc code() const noexcept { return code_; }
    std::optional<std::size_t> step() const noexcept { return step_; }

private:
    Errc code_;
    std::optional<std::size_t> step_;
};

inline std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::InvalidInput: return "InvalidInput";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::SingularMatrix: return "SingularMatrix";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::NotNearlyPeriodic: return "NotNearlyPeriodic";
    case Errc::InsufficientSample: return "InsufficientSample";
    case Errc::DegenerateCompression: return "DegenerateCompression";
    case Errc::NotNearUnitary: return "NotNearUnitary";
    case Errc::NumericalBlowup: return "NumericalBlowup";
    case Errc::DivisionByZero: return "DivisionByZero";
    case Errc::GenerationFailed: return "GenerationFailed";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace nepid
