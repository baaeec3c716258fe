#pragma once

// The 13-slot query-document feature vector used by the re-ranker.

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tradrank/index.hpp"
#include "tradrank/model1.hpp"
#include "tradrank/textproc.hpp"

namespace tradrank {

inline constexpr std::size_t kFeatureCount = 13;
using FeatureVector = std::array<double, kFeatureCount>;

/// Slot layout, 0-based:
///   0-2   normalized BM25 on url.lemm, title.lemm, body.lemm
///   3-4   cosine on title.lemm, body.lemm
///   5-6   query overlap on title.lemm, body.lemm
///   7-8   proximity (unordered, ordered-adjacent) on body.lemm
///   9-11  Model 1 log-score on url.rawtok, title.rawtok, body.rawtok
///   12    Model 1 log-score on body.wp
const std::array<std::string_view, kFeatureCount>& feature_names();

/// Views the extractor reads, and the subset that carries a translation table.
const std::vector<std::string>& feature_views();
const std::vector<std::string>& model1_views();

struct ProximityConfig {
  std::size_t window = 8;
  double k1p = 1.2;
};

using IdfFunction = std::function<double(std::string_view)>;

/// bm25_score divided by the summed idf of the query tokens found in the
/// index vocabulary; 0 when that sum is 0.
double normalized_bm25(const Tokens& query, DocOrdinal doc, const InvertedIndex& index,
                       const BM25Params& params);

/// Cosine of (1 + ln tf) * idf weighted vectors; 0 if either is all-zero.
double cosine_sim(const Tokens& query, const Tokens& doc, const IdfFunction& idf);

/// Fraction of distinct query terms present in the document; 0 for an
/// empty query.
double overlap_fraction(const Tokens& query, const Tokens& doc);

/// (unordered, ordered-adjacent) pair proximity with saturation
/// pf / (pf + k1p). Both are normalized by the idf mass of all unordered
/// query term pairs, so the second never exceeds the first.
std::pair<double, double> proximity_scores(const Tokens& query, const Tokens& doc,
                                           const IdfFunction& idf, const ProximityConfig& cfg);

struct FeatureConfig {
  BM25Params field_bm25;
  ProximityConfig proximity;
  double model1_lambda = 0.1;
  double model1_self_prob = 0.05;
};

/// A query processed for every feature view, with reverse translation
/// tables ready for the Model 1 slots.
class PreparedQuery {
 public:
  const Tokens& tokens(const std::string& view_id) const { return views_.at(view_id).tokens; }

 private:
  friend class FeatureExtractor;
  struct View {
    Tokens tokens;
    std::vector<TermId> ids;  // unseen terms get ids past the dictionary
    std::vector<double> idf;  // per token
    std::unique_ptr<ReverseTable> reverse;
    std::optional<ReverseTable::Bound> bound;
  };
  std::map<std::string, View> views_;
};

class FeatureExtractor {
 public:
  /// Throws MissingArtifact if a feature view is absent from the index set.
  /// Views without a table score with an empty table.
  FeatureExtractor(const IndexSet& indices, std::map<std::string, TranslationTable> tables,
                   FeatureConfig config, TextResources resources);

  PreparedQuery prepare(std::string_view query_text) const;
  PreparedQuery prepare(const std::map<std::string, Tokens>& view_tokens) const;

  FeatureVector extract(const PreparedQuery& query, DocOrdinal doc) const;
  /// Throws UnknownDocument.
  FeatureVector extract(const PreparedQuery& query, const std::string& doc_id) const;

  const IndexSet& indices() const { return indices_; }
  const FeatureConfig& config() const { return config_; }
  const TextResources& resources() const { return resources_; }
  Model1ScoreConfig model1_config(const std::string& view_id) const;
  const TranslationTable& table(const std::string& view_id) const;

 private:
  const IndexSet& indices_;
  std::map<std::string, TranslationTable> tables_;
  std::map<std::string, CollectionModel> collections_;
  std::map<std::string, std::vector<double>> idf_;  // per view, by term id
  FeatureConfig config_;
  TextResources resources_;
  TranslationTable empty_table_;
};

// ---- SVMlight-style feature files ---------------------------------------

struct FeatureRow {
  int label = 0;
  std::string qid;
  std::string doc_id;
  FeatureVector values{};

  bool operator==(const FeatureRow&) const = default;
};

/// `label qid:<qid> 1:<v1> ... 13:<v13> # <doc_id>`
void write_feature_file(const std::string& path, const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> read_feature_file(const std::string& path);

}  // namespace tradrank
