#include "tradrank/eval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "tradrank/error.hpp"

namespace tradrank {

int Qrels::relevance(const std::string& qid, const std::string& doc_id) const {
  auto q = judgments.find(qid);
  if (q == judgments.end()) {
    return 0;
  }
  auto d = q->second.find(doc_id);
  return d == q->second.end() ? 0 : d->second;
}

bool Qrels::has_relevant(const std::string& qid) const {
  auto q = judgments.find(qid);
  if (q == judgments.end()) {
    return false;
  }
  return std::any_of(q->second.begin(), q->second.end(), [](const auto& kv) { return kv.second >= 1; });
}

void Qrels::set(const std::string& qid, const std::string& doc_id, int rel) {
  if (rel < 0) {
    throw Error(ErrorCode::InvalidArgument, "negative relevance for " + qid + "/" + doc_id);
  }
  auto [it, inserted] = judgments[qid].insert_or_assign(doc_id, rel);
  (void)it;
  if (!inserted) {
    ++duplicates;
  }
}

std::size_t Qrels::size() const {
  std::size_t n = 0;
  for (const auto& [qid, docs] : judgments) {
    n += docs.size();
  }
  return n;
}

void RunFile::set_ranking(const std::string& qid, std::vector<ScoredDoc> docs) {
  std::sort(docs.begin(), docs.end(), ranks_before);
  std::unordered_set<std::string> seen;
  std::vector<RunEntry> entries;
  entries.reserve(docs.size());
  for (auto& doc : docs) {
    if (!seen.insert(doc.doc_id).second) {
      throw Error(ErrorCode::InconsistentRanks, "duplicate doc " + doc.doc_id + " for query " + qid);
    }
    entries.push_back({std::move(doc.doc_id), static_cast<int>(entries.size()) + 1, doc.score});
  }
  queries[qid] = std::move(entries);
}

double dcg_at_k(const std::vector<int>& labels_in_rank_order, int k) {
  double dcg = 0.0;
  const auto limit = std::min<std::size_t>(labels_in_rank_order.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < limit; ++i) {
    const int rel = labels_in_rank_order[i];
    if (rel > 0) {
      dcg += (std::exp2(rel) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }
  }
  return dcg;
}

double ideal_dcg_at_k(std::vector<int> labels, int k) {
  std::sort(labels.begin(), labels.end(), std::greater<>());
  return dcg_at_k(labels, k);
}

namespace {

void check_cutoff(int k) {
  if (k < 1) {
    throw Error(ErrorCode::InvalidArgument, "metric cutoff must be >= 1");
  }
}

const std::vector<RunEntry>* ranking_for(const RunFile& run, const std::string& qid) {
  auto it = run.queries.find(qid);
  return it == run.queries.end() ? nullptr : &it->second;
}

}  // namespace

double mrr_at_k(const RunFile& run, const Qrels& qrels, int k) {
  check_cutoff(k);
  double sum = 0.0;
  std::size_t evaluated = 0;
  for (const auto& [qid, judged] : qrels.judgments) {
    if (!qrels.has_relevant(qid)) {
      continue;
    }
    ++evaluated;
    const auto* ranking = ranking_for(run, qid);
    if (ranking == nullptr) {
      continue;
    }
    const auto limit = std::min<std::size_t>(ranking->size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < limit; ++i) {
      auto it = judged.find((*ranking)[i].doc_id);
      if (it != judged.end() && it->second >= 1) {
        sum += 1.0 / static_cast<double>(i + 1);
        break;
      }
    }
  }
  if (evaluated == 0) {
    throw Error(ErrorCode::NoEvaluableQueries, "no query has a judged relevant document");
  }
  return sum / static_cast<double>(evaluated);
}

std::map<std::string, double> per_query_ndcg(const RunFile& run, const Qrels& qrels, int k) {
  check_cutoff(k);
  std::map<std::string, double> out;
  for (const auto& [qid, judged] : qrels.judgments) {
    std::vector<int> all_labels;
    for (const auto& [doc, rel] : judged) {
      all_labels.push_back(rel);
    }
    const double ideal = ideal_dcg_at_k(std::move(all_labels), k);
    if (ideal <= 0.0) {
      continue;
    }
    std::vector<int> ranked;
    if (const auto* ranking = ranking_for(run, qid)) {
      for (const auto& entry : *ranking) {
        if (ranked.size() == static_cast<std::size_t>(k)) break;
        auto it = judged.find(entry.doc_id);
        ranked.push_back(it == judged.end() ? 0 : it->second);
      }
    }
    out[qid] = dcg_at_k(ranked, k) / ideal;
  }
  return out;
}

double ndcg_at_k(const RunFile& run, const Qrels& qrels, int k) {
  const auto per_query = per_query_ndcg(run, qrels, k);
  if (per_query.empty()) {
    throw Error(ErrorCode::NoEvaluableQueries, "no query has nonzero ideal DCG");
  }
  double sum = 0.0;
  for (const auto& [qid, value] : per_query) {
    sum += value;
  }
  return sum / static_cast<double>(per_query.size());
}

}  // namespace tradrank
