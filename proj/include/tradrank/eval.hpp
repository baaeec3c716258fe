#pragma once

// TREC run / qrels files and the ranking metrics reported for them.

#include <map>
#include <string>
#include <vector>

#include "tradrank/corpus.hpp"
#include "tradrank/ranking.hpp"

namespace tradrank {

struct Qrels {
  std::map<std::string, std::map<std::string, int>> judgments;
  std::size_t duplicates = 0;  // repeated keys seen while reading; last wins

  int relevance(const std::string& qid, const std::string& doc_id) const;
  bool has_relevant(const std::string& qid) const;
  void set(const std::string& qid, const std::string& doc_id, int rel);
  std::size_t size() const;

  bool operator==(const Qrels& other) const { return judgments == other.judgments; }
};

struct RunEntry {
  std::string doc_id;
  int rank = 0;
  double score = 0.0;

  bool operator==(const RunEntry&) const = default;
};

struct RunFile {
  std::string tag = "tradrank";
  std::map<std::string, std::vector<RunEntry>> queries;

  /// Orders docs by ranks_before and assigns ranks 1..n. Throws
  /// InconsistentRanks on a duplicate doc_id.
  void set_ranking(const std::string& qid, std::vector<ScoredDoc> docs);

  bool operator==(const RunFile&) const = default;
};

/// `qid 0 docid rel`, whitespace separated. Throws ParseError with the line number.
Qrels read_qrels(const std::string& path);
void write_qrels(const std::string& path, const Qrels& qrels);

/// `qid Q0 docid rank score tag`. Throws ParseError, InconsistentRanks
/// (ranks not contiguous from 1, scores increasing with rank, or a
/// duplicate document within a query).
RunFile read_run(const std::string& path);
void write_run(const std::string& path, const RunFile& run);

/// Queries evaluated by both metrics are those with at least one judged
/// relevant document; such a query missing from the run scores 0. Both throw
/// NoEvaluableQueries when nothing is left to average.
double mrr_at_k(const RunFile& run, const Qrels& qrels, int k);
double ndcg_at_k(const RunFile& run, const Qrels& qrels, int k);

/// Per-query values, keyed by qid, over the same evaluated query set.
std::map<std::string, double> per_query_ndcg(const RunFile& run, const Qrels& qrels, int k);

/// DCG@k of a ranked label list, gains 2^rel - 1, discount 1/log2(rank+1).
double dcg_at_k(const std::vector<int>& labels_in_rank_order, int k);
/// DCG@k of the ideal ordering of the given labels.
double ideal_dcg_at_k(std::vector<int> labels, int k);

}  // namespace tradrank
