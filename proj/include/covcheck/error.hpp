#pragma once

#include <stdexcept>
#include <string>

namespace covcheck {

enum class ErrorKind {
  MissingFile,
  IoError,
  SchemaError,
  LabelOutOfRange,
  NonFiniteValue,
  DuplicateId,
  ConfidenceNotNormalized,
  EmptyClass,
  EmptyDataset,
  EmptyInput,
  MissingConfidences,
  DimensionMismatch,
  DegenerateLabels,
  AllUndefined,
  InvalidConfig,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::ConfidenceNotNormalized: return "ConfidenceNotNormalized";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::MissingConfidences: return "MissingConfidences";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::AllUndefined: return "AllUndefined";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace covcheck
