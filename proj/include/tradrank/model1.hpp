#pragma once

// IBM Model 1 lexical translation: bitext construction from judged
// query-document pairs, EM training, table pruning, and query-likelihood
// scoring with an O(|D|) reverse-table fast path.

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tradrank/corpus.hpp"
#include "tradrank/eval.hpp"
#include "tradrank/index.hpp"

namespace tradrank {

/// Query (target) paired with one document chunk (source).
struct BitextPair {
  Tokens target;
  Tokens source;

  bool operator==(const BitextPair&) const = default;
};

struct TranslationEntry {
  std::string source;
  std::string target;
  double prob = 0.0;
};

struct TranslationMeta {
  int iterations = 0;
  std::size_t bitext_pairs = 0;

  bool operator==(const TranslationMeta&) const = default;
};

/// Conditional distributions t(target | source), stored per source row.
/// Vocabularies are kept in lexicographic order and only list terms that
/// occur in some entry, so two tables holding the same entries compare
/// equal regardless of how they were produced.
class TranslationTable {
 public:
  struct Cell {
    std::uint32_t target = 0;
    double prob = 0.0;

    bool operator==(const Cell&) const = default;
  };

  TranslationTable() = default;
  /// Throws InvalidArgument for probabilities outside (0,1] or duplicate
  /// (source, target) pairs.
  TranslationTable(std::vector<TranslationEntry> entries, TranslationMeta meta);

  std::size_t source_size() const { return sources_.size(); }
  std::size_t target_size() const { return targets_.size(); }
  std::size_t num_entries() const;
  const std::string& source_term(std::uint32_t id) const { return sources_[id]; }
  const std::string& target_term(std::uint32_t id) const { return targets_[id]; }
  std::optional<std::uint32_t> find_source(std::string_view term) const;
  std::optional<std::uint32_t> find_target(std::string_view term) const;

  /// Row of a source term, sorted by descending probability.
  std::span<const Cell> row(std::uint32_t source) const { return rows_[source]; }
  double row_mass(std::uint32_t source) const;

  /// t(target | source), 0 for absent entries.
  double prob(std::string_view source, std::string_view target) const;

  /// Source rows holding an entry for the given target id: (source id, prob).
  std::span<const std::pair<std::uint32_t, double>> column(std::uint32_t target) const {
    return columns_[target];
  }

  const TranslationMeta& meta() const { return meta_; }
  std::vector<TranslationEntry> entries() const;

  bool operator==(const TranslationTable& other) const {
    return sources_ == other.sources_ && targets_ == other.targets_ && rows_ == other.rows_ &&
           meta_ == other.meta_;
  }

 private:
  std::vector<std::string> sources_;
  std::vector<std::string> targets_;
  std::unordered_map<std::string, std::uint32_t> source_ids_;
  std::unordered_map<std::string, std::uint32_t> target_ids_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> columns_;
  std::unordered_map<std::uint64_t, double> lookup_;
  TranslationMeta meta_;
};

// ---- Bitext -------------------------------------------------------------

/// Consecutive non-overlapping chunks of target_len tokens; the last chunk
/// may be shorter. Throws InvalidArgument for target_len < 1.
std::vector<Tokens> chunk_document(const Tokens& tokens, std::size_t target_len);

struct BitextStats {
  std::size_t missing_documents = 0;
  std::size_t dropped_empty = 0;
};

/// One pair per chunk of every judged-relevant (query, document). Query
/// views are looked up by qid; documents missing from the forward index are
/// skipped and counted.
std::vector<BitextPair> build_bitext(const std::map<std::string, Tokens>& queries,
                                     const Qrels& qrels, const ForwardIndex& forward,
                                     const DocTable& docs, std::size_t target_len,
                                     BitextStats* stats = nullptr);

void write_bitext(const std::string& path, const std::vector<BitextPair>& bitext);
std::vector<BitextPair> read_bitext(const std::string& path);

// ---- Training -----------------------------------------------------------

struct Model1TrainingResult {
  TranslationTable table;
  /// Corpus log-likelihood under the initial table and after every
  /// iteration (size iterations + 1).
  std::vector<double> log_likelihood;
};

/// Standard Model 1 EM without a NULL source word, uniform initialization.
/// Throws EmptyBitext, InvalidArgument (iterations < 1).
Model1TrainingResult train_model1(const std::vector<BitextPair>& bitext, int iterations);

/// Sum over pairs and target tokens of ln(mean over source tokens of
/// t(target|source)).
double corpus_log_likelihood(const std::vector<BitextPair>& bitext, const TranslationTable& table);

inline constexpr std::size_t kNoLimit = std::numeric_limits<std::size_t>::max();

/// Keeps entries with prob >= min_prob, then at most top_n per row;
/// optionally renormalizes rows to sum to 1.
TranslationTable prune_table(const TranslationTable& table, double min_prob, std::size_t top_n,
                             bool renormalize);

/// Text format: a header line, then `source TAB target TAB prob` sorted by
/// source, then descending prob.
void write_table(const std::string& path, const TranslationTable& table);
TranslationTable read_table(const std::string& path);

// ---- Scoring ------------------------------------------------------------

using CollectionModel = std::unordered_map<std::string, double>;

/// Unigram distribution cf(t) / total tokens of a view.
CollectionModel collection_model(const InvertedIndex& index);

struct Model1ScoreConfig {
  double lambda = 0.1;
  double self_prob = 0.05;
  const CollectionModel* collection = nullptr;  // not owned; null means all zero
};

inline constexpr double kModel1Floor = -23.025850929940457;  // ln(1e-10)

/// Mean over query positions of ln[(1-lambda) * sum_w t'(q|w) c(w,D)/|D|
/// + lambda * P_C(q)], with t' mixing in self-translation. A zero bracket
/// contributes ln(1e-10). Throws EmptyQuery.
double model1_log_score(const Tokens& query, const Tokens& doc, const TranslationTable& table,
                        const Model1ScoreConfig& cfg);

/// Query-specific inverse of the table: for each document term that can
/// produce some query term, the vector of t'(q_i|w) over query positions.
class ReverseTable {
 public:
  /// Throws EmptyQuery.
  ReverseTable(const Tokens& query, const TranslationTable& table, const Model1ScoreConfig& cfg);

  std::size_t query_length() const { return query_.size(); }
  const Tokens& query() const { return query_; }
  /// Contribution vector for a document term, or nullptr if it contributes nothing.
  const double* contributions(std::string_view doc_term) const;
  /// Collection-model term lambda * P_C(q_i) for each position.
  const std::vector<double>& background() const { return background_; }

  /// Re-keys the table by the term ids of a view dictionary.
  class Bound {
   public:
    const double* contributions(TermId id) const {
      auto it = slots_.find(id);
      return it == slots_.end() ? nullptr : it->second;
    }
    const ReverseTable& table() const { return *owner_; }

   private:
    friend class ReverseTable;
    const ReverseTable* owner_ = nullptr;
    std::unordered_map<TermId, const double*> slots_;
  };
  Bound bind(const TermDictionary& dict) const;

 private:
  Tokens query_;
  std::unordered_map<std::string, std::size_t> slot_of_;
  std::vector<double> values_;  // slot-major, query_length() per slot
  std::vector<double> background_;
};

/// Same value as model1_log_score, computed in one pass over the document.
double score_with_reverse_table(const Tokens& doc, const ReverseTable& rt,
                                const Model1ScoreConfig& cfg);
double score_with_reverse_table(std::span<const TermId> doc, const ReverseTable::Bound& rt,
                                const Model1ScoreConfig& cfg);

}  // namespace tradrank
