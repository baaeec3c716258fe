#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tradrank {

enum class ErrorCode {
  InvalidArgument,
  MissingVocabulary,
  DuplicateDocId,
  EmptyCorpus,
  EmptyGrid,
  NoJudgedQueries,
  EmptyBitext,
  EmptyQuery,
  UnknownDocument,
  DegenerateTraining,
  DimensionMismatch,
  MissingFeatures,
  NoEvaluableQueries,
  ParseError,
  InconsistentRanks,
  ConfigError,
  MissingArtifact,
  LockHeld,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the categories above,
/// so the CLI can map it onto an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tradrank
