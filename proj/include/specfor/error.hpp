#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specfor {

enum class ErrorCode {
    FileNotFound,
    UnsupportedFormat,
    CorruptImage,
    IoError,
    NonFiniteInput,
    InputTooLarge,
    DegenerateProfile,
    EmptyInput,
    BadRatios,
    MalformedRow,
    SchemaMismatch,
    EmptySplit,
    TooFewSamples,
    MalformedModel,
    LengthMismatch,
    OneClassOnly,
    NoPositives,
    InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptImage: return "CorruptImage";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::InputTooLarge: return "InputTooLarge";
    case ErrorCode::DegenerateProfile: return "DegenerateProfile";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::BadRatios: return "BadRatios";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::MalformedModel: return "MalformedModel";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::OneClassOnly: return "OneClassOnly";
    case ErrorCode::NoPositives: return "NoPositives";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace specfor
