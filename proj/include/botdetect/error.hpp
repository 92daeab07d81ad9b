#pragma once

#include <stdexcept>
#include <string>

namespace botdetect {

enum class ErrorKind {
  // configuration
  InvalidConfig,
  // data
  FileNotFound,
  HeaderMismatch,
  ParseError,
  DimensionMismatch,
  SchemaMismatch,
  EmptyInput,
  EmptyClass,
  SingleClass,
  InsufficientRows,
  DegenerateMinority,
  DegenerateData,
  // training
  TrainingFailure,
};

enum class ErrorCategory { Config, Data, Training };

constexpr ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
      return ErrorCategory::Config;
    case ErrorKind::TrainingFailure:
      return ErrorCategory::Training;
    default:
      return ErrorCategory::Data;
  }
}

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace botdetect
