// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tunnelrange {

enum class ErrorCode {
    InvalidInput,
    NoSignalDetected,
    DegenerateSignal,
    InsufficientData,
    UndefinedOverlap,
    UndefinedCorrelation,
    DegenerateFit,
    InvalidProfile,
    LoadError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NoSignalDetected: return "NoSignalDetected";
    case ErrorCode::DegenerateSignal: return "DegenerateSignal";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::UndefinedOverlap: return "UndefinedOverlap";
    case ErrorCode::UndefinedCorrelation: return "UndefinedCorrelation";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::LoadError: return "LoadError";
    }
    return "Unknown";
}

// Every failure raised by the library carries one of the codes above so the
// CLI can map it onto an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace tunnelrange
