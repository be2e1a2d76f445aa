#pragma once

#include <stdexcept>
#include <string>

namespace hsmae {

enum class ErrorCode {
    // cube_io
    MissingMagic,
    MissingKey,
    MalformedValue,
    LengthMismatch,
    TruncatedData,
    UnsupportedDataType,
    NoSpectralMetadata,
    CorruptHeader,
    // sampling / augmentation
    InvalidCount,
    ShapeMismatch,
    InvalidRecord,
    TooSmall,
    DegenerateCurve,
    // tokenizer / masking
    NotDivisible,
    IncompleteTokens,
    DuplicateToken,
    OutOfRange,
    GridMismatch,
    // model / optimization
    NonFinite,
    AlignmentError,
    IndexOutOfRange,
    // data / config
    MissingLabels,
    EmptySplit,
    ConfigError,
    DataError,
    IoError,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::MissingMagic: return "MissingMagic";
        case ErrorCode::MissingKey: return "MissingKey";
        case ErrorCode::MalformedValue: return "MalformedValue";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::TruncatedData: return "TruncatedData";
        case ErrorCode::UnsupportedDataType: return "UnsupportedDataType";
        case ErrorCode::NoSpectralMetadata: return "NoSpectralMetadata";
        case ErrorCode::CorruptHeader: return "CorruptHeader";
        case ErrorCode::InvalidCount: return "InvalidCount";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::InvalidRecord: return "InvalidRecord";
        case ErrorCode::TooSmall: return "TooSmall";
        case ErrorCode::DegenerateCurve: return "DegenerateCurve";
        case ErrorCode::NotDivisible: return "NotDivisible";
        case ErrorCode::IncompleteTokens: return "IncompleteTokens";
        case ErrorCode::DuplicateToken: return "DuplicateToken";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::AlignmentError: return "AlignmentError";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::MissingLabels: return "MissingLabels";
        case ErrorCode::EmptySplit: return "EmptySplit";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::DataError: return "DataError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace hsmae
