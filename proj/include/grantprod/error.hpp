#pragma once

#include <stdexcept>
#include <string>

namespace grantprod {

enum class ErrorCode {
  ParseError = 1,
  DuplicateId,
  DanglingReference,
  UnknownResearcher,
  UnknownInstitution,
  UnknownAreaCode,
  UnknownGrant,
  UnknownFamily,
  DegenerateData,
  InsufficientData,
  InvalidHyperparameter,
  DimensionMismatch,
  WrongModelKind,
  EmptyNode,
  EmptyEnsemble,
  KOutOfRange,
  InvalidConfig,
  MissingResults,
  IoError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace grantprod
