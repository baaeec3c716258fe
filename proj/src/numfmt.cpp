#include "tradrank/numfmt.hpp"

#include <charconv>
#include <cmath>

#include "tradrank/error.hpp"

namespace tradrank {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingVocabulary: return "MissingVocabulary";
    case ErrorCode::DuplicateDocId: return "DuplicateDocId";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::NoJudgedQueries: return "NoJudgedQueries";
    case ErrorCode::EmptyBitext: return "EmptyBitext";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::UnknownDocument: return "UnknownDocument";
    case ErrorCode::DegenerateTraining: return "DegenerateTraining";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingFeatures: return "MissingFeatures";
    case ErrorCode::NoEvaluableQueries: return "NoEvaluableQueries";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InconsistentRanks: return "InconsistentRanks";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::LockHeld: return "LockHeld";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string format_double(double value) {
  if (value == 0.0) {
    return "0";  // folds -0 so that written files do not depend on sign of zero
  }
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) {
    throw Error(ErrorCode::InvalidArgument, "cannot format double");
  }
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') {
    ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw Error(ErrorCode::ParseError, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

long long parse_int(std::string_view text) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::ParseError, "not an integer: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace tradrank
