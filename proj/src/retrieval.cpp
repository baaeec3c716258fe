#include <algorithm>
#include <limits>
#include <queue>

#include "tradrank/error.hpp"
#include "tradrank/eval.hpp"
#include "tradrank/index.hpp"
#include "tradrank/numfmt.hpp"

namespace tradrank {

namespace {

struct Cursor {
  std::span<const Posting> list;
  std::size_t pos = 0;
  double idf = 0.0;

  bool done() const { return pos >= list.size(); }
  DocOrdinal doc() const { return list[pos].doc; }
};

struct WorseFirst {
  bool operator()(const ScoredDoc& a, const ScoredDoc& b) const { return ranks_before(a, b); }
};

}  // namespace

CandidateList retrieve_topk(const InvertedIndex& index, const BM25Params& params,
                            const Tokens& query, std::size_t k) {
  if (k == 0) {
    throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  }
  CandidateList result;

  // One cursor per distinct indexed term; each query occurrence points at
  // its cursor so scores accumulate in query order like bm25_score.
  std::vector<Cursor> cursors;
  std::unordered_map<TermId, std::size_t> cursor_of;
  std::vector<std::size_t> occurrence_cursor;
  for (const auto& token : query) {
    auto id = index.dictionary().find(token);
    if (!id || index.df(*id) == 0) {
      continue;
    }
    auto [it, inserted] = cursor_of.try_emplace(*id, cursors.size());
    if (inserted) {
      cursors.push_back({index.postings(*id), 0, idf_from_counts(index.num_docs(), index.df(*id))});
    }
    occurrence_cursor.push_back(it->second);
  }
  if (cursors.empty()) {
    return result;
  }

  std::priority_queue<ScoredDoc, std::vector<ScoredDoc>, WorseFirst> heap;
  const auto& docs = index.docs();
  while (true) {
    DocOrdinal current = std::numeric_limits<DocOrdinal>::max();
    for (const auto& c : cursors) {
      if (!c.done()) {
        current = std::min(current, c.doc());
      }
    }
    if (current == std::numeric_limits<DocOrdinal>::max()) {
      break;
    }
    const double len = index.doc_len(current);
    double score = 0.0;
    for (std::size_t ci : occurrence_cursor) {
      const auto& c = cursors[ci];
      if (!c.done() && c.doc() == current) {
        score += bm25_term_weight(c.idf, c.list[c.pos].tf, len, index.avg_len(), params);
      }
    }
    for (auto& c : cursors) {
      if (!c.done() && c.doc() == current) {
        ++c.pos;
      }
    }
    if (!(score > 0.0)) {
      continue;
    }
    ScoredDoc candidate{docs.doc_id(current), score};
    if (heap.size() < k) {
      heap.push(std::move(candidate));
    } else if (ranks_before(candidate, heap.top())) {
      heap.pop();
      heap.push(std::move(candidate));
    }
  }
  result.entries.resize(heap.size());
  for (std::size_t i = heap.size(); i-- > 0;) {
    result.entries[i] = heap.top();
    heap.pop();
  }
  return result;
}

MetricSpec parse_metric(std::string_view text) {
  const auto at = text.find('@');
  if (at == std::string_view::npos) {
    throw Error(ErrorCode::ConfigError, "metric must look like mrr@100 or ndcg@10");
  }
  MetricSpec spec;
  const auto name = text.substr(0, at);
  if (name == "mrr") {
    spec.kind = MetricKind::mrr;
  } else if (name == "ndcg") {
    spec.kind = MetricKind::ndcg;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown metric '" + std::string(name) + "'");
  }
  spec.cutoff = static_cast<int>(parse_int(text.substr(at + 1)));
  if (spec.cutoff < 1) {
    throw Error(ErrorCode::ConfigError, "metric cutoff must be >= 1");
  }
  return spec;
}

std::vector<BM25Params> default_bm25_grid() {
  std::vector<BM25Params> grid;
  for (int i = 0; i <= 8; ++i) {
    const double k1 = (4 + 2 * i) / 10.0;
    for (double b : {0.3, 0.45, 0.6, 0.75, 0.9}) {
      grid.push_back({k1, b});
    }
  }
  return grid;
}

TuningResult tune_bm25(const InvertedIndex& index, const std::map<std::string, Tokens>& dev_queries,
                       const Qrels& dev_qrels, const std::vector<BM25Params>& grid,
                       MetricSpec metric) {
  if (grid.empty()) {
    throw Error(ErrorCode::EmptyGrid, "BM25 tuning grid is empty");
  }
  // Only judged queries that we actually have text for take part.
  Qrels judged;
  for (const auto& [qid, docs] : dev_qrels.judgments) {
    if (dev_queries.contains(qid) && dev_qrels.has_relevant(qid)) {
      judged.judgments[qid] = docs;
    }
  }
  if (judged.judgments.empty()) {
    throw Error(ErrorCode::NoJudgedQueries, "no dev query has a judged relevant document");
  }
  TuningResult result;
  result.best_value = -1.0;
  for (const auto& params : grid) {
    validate(params);
    RunFile run;
    for (const auto& [qid, docs] : judged.judgments) {
      auto candidates = retrieve_topk(index, params, dev_queries.at(qid),
                                      static_cast<std::size_t>(metric.cutoff));
      run.set_ranking(qid, std::move(candidates.entries));
    }
    const double value = metric.kind == MetricKind::mrr ? mrr_at_k(run, judged, metric.cutoff)
                                                        : ndcg_at_k(run, judged, metric.cutoff);
    result.values.push_back(value);
    if (value > result.best_value) {
      result.best_value = value;
      result.best = params;
    }
  }
  return result;
}

}  // namespace tradrank
