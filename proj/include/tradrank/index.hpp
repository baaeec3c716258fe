#pragma once

// Inverted and forward indices per field view, BM25 scoring, top-k
// candidate generation and BM25 grid tuning.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tradrank/corpus.hpp"
#include "tradrank/ranking.hpp"
#include "tradrank/textproc.hpp"

namespace tradrank {

using TermId = std::uint32_t;
using DocOrdinal = std::uint32_t;

inline constexpr int kIndexFormatVersion = 1;

/// Term ids are assigned in first-occurrence order during ingestion.
class TermDictionary {
 public:
  TermId add(std::string_view term);
  std::optional<TermId> find(std::string_view term) const;
  const std::string& term(TermId id) const { return terms_[id]; }
  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }

  bool operator==(const TermDictionary& other) const { return terms_ == other.terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> ids_;
};

/// doc_ordinal <-> doc_id, shared by every view of a corpus.
class DocTable {
 public:
  DocOrdinal add(const std::string& doc_id);  // throws DuplicateDocId
  std::optional<DocOrdinal> find(std::string_view doc_id) const;
  const std::string& doc_id(DocOrdinal ord) const { return ids_[ord]; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  bool operator==(const DocTable& other) const { return ids_ == other.ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, DocOrdinal> ordinals_;
};

struct Posting {
  DocOrdinal doc = 0;
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

struct BM25Params {
  double k1 = 1.2;
  double b = 0.75;

  bool operator==(const BM25Params&) const = default;
};

/// Throws InvalidArgument unless k1 >= 0 and b in [0,1].
void validate(const BM25Params& params);

class InvertedIndex {
 public:
  InvertedIndex() = default;
  InvertedIndex(std::string view_id, std::shared_ptr<const TermDictionary> dict,
                std::shared_ptr<const DocTable> docs, std::vector<std::vector<Posting>> postings,
                std::vector<std::uint32_t> doc_len);

  const std::string& view_id() const { return view_id_; }
  const TermDictionary& dictionary() const { return *dict_; }
  const DocTable& docs() const { return *docs_; }

  std::size_t num_docs() const { return doc_len_.size(); }
  double avg_len() const { return avg_len_; }
  std::uint32_t doc_len(DocOrdinal doc) const { return doc_len_[doc]; }
  const std::vector<std::uint32_t>& doc_lengths() const { return doc_len_; }

  std::span<const Posting> postings(TermId term) const { return postings_[term]; }
  std::uint32_t df(std::string_view term) const;
  std::uint32_t df(TermId term) const { return static_cast<std::uint32_t>(postings_[term].size()); }
  /// Collection frequency (total occurrences).
  std::uint64_t cf(TermId term) const;
  std::uint64_t total_tokens() const { return total_tokens_; }
  std::uint32_t tf(TermId term, DocOrdinal doc) const;

  bool operator==(const InvertedIndex& other) const;

 private:
  std::string view_id_;
  std::shared_ptr<const TermDictionary> dict_;
  std::shared_ptr<const DocTable> docs_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<std::uint32_t> doc_len_;
  double avg_len_ = 0.0;
  std::uint64_t total_tokens_ = 0;
};

class ForwardIndex {
 public:
  ForwardIndex() = default;
  ForwardIndex(std::string view_id, std::shared_ptr<const TermDictionary> dict,
               std::vector<std::uint64_t> offsets, std::vector<TermId> tokens);

  const std::string& view_id() const { return view_id_; }
  const TermDictionary& dictionary() const { return *dict_; }
  std::size_t num_docs() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }

  /// Token ids of one document in position order.
  std::span<const TermId> doc(DocOrdinal ord) const {
    return std::span<const TermId>(tokens_).subspan(offsets_[ord], offsets_[ord + 1] - offsets_[ord]);
  }
  Tokens doc_tokens(DocOrdinal ord) const;

  bool operator==(const ForwardIndex& other) const;

 private:
  std::string view_id_;
  std::shared_ptr<const TermDictionary> dict_;
  std::vector<std::uint64_t> offsets_;
  std::vector<TermId> tokens_;
};

struct ViewIndex {
  FieldViewSpec spec;
  InvertedIndex inverted;
  ForwardIndex forward;
};

/// All views of one corpus.
struct IndexSet {
  std::shared_ptr<const DocTable> docs;
  std::map<std::string, ViewIndex> views;

  const ViewIndex& view(const std::string& view_id) const;  // throws MissingArtifact
  bool has_view(const std::string& view_id) const { return views.contains(view_id); }
};

/// Throws DuplicateDocId, EmptyCorpus.
IndexSet build_indices(const std::vector<DocumentRecord>& corpus,
                       const std::vector<FieldViewSpec>& specs, const TextResources& resources);

/// Builds a single view from pre-tokenized documents (doc_ids parallel to docs).
ViewIndex build_view_index(const FieldViewSpec& spec, std::shared_ptr<const DocTable> docs,
                           const std::vector<Tokens>& token_lists);

void save_indices(const IndexSet& indices, const std::string& dir);
IndexSet load_indices(const std::string& dir);

// ---- BM25 --------------------------------------------------------------

/// ln(1 + (N - df + 0.5) / (df + 0.5)); unseen terms have df = 0.
double idf(const InvertedIndex& index, std::string_view term);
double idf_from_counts(std::size_t num_docs, std::size_t df);

/// Contribution of one query token occurrence with frequency tf in a
/// document of length doc_len.
inline double bm25_term_weight(double idf_value, double tf, double doc_len, double avg_len,
                               const BM25Params& p) {
  const double norm = avg_len > 0.0 ? doc_len / avg_len : 0.0;
  return idf_value * (tf * (p.k1 + 1.0)) / (tf + p.k1 * (1.0 - p.b + p.b * norm));
}

double bm25_score(const InvertedIndex& index, const BM25Params& params, const Tokens& query,
                  DocOrdinal doc);

/// Document-at-a-time traversal with a bounded heap. Only documents with a
/// positive score are returned; order follows ranks_before.
CandidateList retrieve_topk(const InvertedIndex& index, const BM25Params& params,
                            const Tokens& query, std::size_t k = 1000);

enum class MetricKind { mrr, ndcg };

struct MetricSpec {
  MetricKind kind = MetricKind::mrr;
  int cutoff = 100;
};

/// Parses "mrr@100" / "ndcg@10".
MetricSpec parse_metric(std::string_view text);

struct Qrels;

/// k1 in {0.4, 0.6, ..., 2.0} crossed with b in {0.3, 0.45, 0.6, 0.75, 0.9},
/// k1-major.
std::vector<BM25Params> default_bm25_grid();

struct TuningResult {
  BM25Params best;
  double best_value = 0.0;
  std::vector<double> values;  // parallel to the grid
};

/// Grid search; the first grid point wins ties. Throws EmptyGrid and
/// NoJudgedQueries.
TuningResult tune_bm25(const InvertedIndex& index, const std::map<std::string, Tokens>& dev_queries,
                       const Qrels& dev_qrels, const std::vector<BM25Params>& grid,
                       MetricSpec metric = {});

}  // namespace tradrank
