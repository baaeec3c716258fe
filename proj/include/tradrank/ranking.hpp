#pragma once

#include <string>
#include <vector>

namespace tradrank {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

/// Global ordering rule for every ranked list: descending score, then
/// ascending doc_id.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) {
    return a.score > b.score;
  }
  return a.doc_id < b.doc_id;
}

struct CandidateList {
  std::string query_id;
  std::vector<ScoredDoc> entries;

  bool operator==(const CandidateList&) const = default;
};

}  // namespace tradrank
